"""Brute-force reference method: dense angle grid plus golden-section polish.

Slow and certification-free, but independent of the other methods, which
makes it the oracle used to validate them on small matrices and the
fallback for degenerate level-set instances.
"""

from __future__ import annotations

import time

import numpy as np

from .spectral import TWO_PI, Method, RadiusResult, as_matrix, eval_h_values

__all__ = ["compute_radius_grid"]

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0
_NUM_BASINS = 5


def _golden_max(f, a: float, b: float, tol: float):
    """Golden-section maximization of f on [a, b]; returns (theta, value, evals)."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    best_t, best_v = (c, fc) if fc >= fd else (d, fd)
    evals = 2
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        evals += 1
        t, v = (c, fc) if fc >= fd else (d, fd)
        if v > best_v:
            best_t, best_v = t, v
    return best_t, best_v, evals


def compute_radius_grid(A, num_points: int = 200000, refine_tol: float = 1e-13) -> RadiusResult:
    """Maximize h over a uniform angle grid, then refine the best basins.

    The grid value is a lower bound on the true radius; after refining the
    best _NUM_BASINS local maxima with golden-section search the result is
    accurate to ~refine_tol in angle on smooth instances.
    """
    A = as_matrix(A)
    if num_points < 16:
        raise ValueError(f"num_points must be >= 16, got {num_points}")
    t0 = time.perf_counter()
    thetas = np.arange(num_points) * (TWO_PI / num_points)
    h = eval_h_values(A, thetas)
    evals = num_points

    # Strict-left / weak-right comparison picks one index per grid plateau.
    is_max = (h > np.roll(h, 1)) & (h >= np.roll(h, -1))
    idx = np.nonzero(is_max)[0]
    if idx.size == 0:
        # h is constant on the grid (normal degenerate case: constant h).
        k = int(np.argmax(h))
        return RadiusResult(value=float(h[k]), theta_star=float(thetas[k]),
                            method=Method.GRID, iterations=0, h_evals=evals,
                            wall_seconds=time.perf_counter() - t0,
                            detail={"basins": 0, "constant": True})

    top = idx[np.argsort(h[idx])[::-1][:_NUM_BASINS]]
    spacing = TWO_PI / num_points
    best_t, best_v = float(thetas[int(np.argmax(h))]), float(h.max())
    iters = 0
    scalar_h = lambda t: float(eval_h_values(A, [t])[0])
    for i in top:
        a = thetas[i] - spacing
        b = thetas[i] + spacing
        t, v, used = _golden_max(scalar_h, a, b, refine_tol)
        evals += used
        iters += 1
        if v > best_v:
            best_t, best_v = t, v
    return RadiusResult(value=best_v, theta_star=float(best_t % TWO_PI),
                        method=Method.GRID, iterations=iters, h_evals=evals,
                        wall_seconds=time.perf_counter() - t0,
                        detail={"basins": int(top.size), "constant": False})
