"""Global maximization of h through adaptive Chebyshev interpolation.

h is sampled at nested Chebyshev-Lobatto grids of sizes 2^k + 1 until the
trailing coefficients fall below tolerance, mirroring how one would
approximate a black-box function to machine precision before calling a
polynomial max routine.  The interpolant's maximum is located through the
roots of its derivative, computed as eigenvalues of the colleague
(Chebyshev companion) matrix.

h is only piecewise analytic: where two eigenvalue branches cross it has a
kink and the coefficient decay stalls.  In that case the interval is
bisected at the sample point with the largest second difference and each
piece is interpolated separately.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from numpy.polynomial import chebyshev as npcheb

from .errors import ChebConvergenceError
from .spectral import TWO_PI, Method, RadiusResult, as_matrix, eval_h_values, sigma_max

__all__ = ["ChebSeries", "cheb_interpolate", "cheb_max", "compute_radius_cheb"]

_K_FIRST = 4           # first grid has 2^4 + 1 = 17 points
_K_CAP = 16            # degree cap 2^16
_K_STALL = 9           # start watching for decay stalls at 2^9 + 1 points
_STALL_RATIO = 0.0625  # tail must shrink 16x per grid doubling to count as decaying
_TAIL_FRACTION = 0.2
_MAX_BISECT_DEPTH = 10
_TIE_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class ChebSeries:
    """Truncated Chebyshev-T expansion of a real function on [a, b].

    tail_bound is the largest dropped trailing coefficient (0 when nothing
    was dropped); it bounds the truncation error introduced on top of the
    interpolation error.
    """

    coeffs: np.ndarray
    domain: tuple[float, float]
    tail_bound: float

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("coeffs must be a nonempty 1-D real array")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "domain", (float(self.domain[0]), float(self.domain[1])))

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def _to_unit(self, theta):
        a, b = self.domain
        return (2.0 * np.asarray(theta, dtype=float) - (a + b)) / (b - a)

    def __call__(self, theta):
        return npcheb.chebval(self._to_unit(theta), self.coeffs)


def _lobatto_nodes(a: float, b: float, num: int) -> np.ndarray:
    """num+1 Chebyshev-Lobatto points mapped to [a, b], ordered from b to a."""
    x = np.cos(np.pi * np.arange(num + 1) / num)
    return 0.5 * (a + b) + 0.5 * (b - a) * x


def _vals_to_coeffs(vals: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients from Lobatto samples via a type-I DCT."""
    n = vals.size - 1
    c = scipy.fft.dct(vals, type=1) / n
    c[0] *= 0.5
    c[-1] *= 0.5
    return c


def cheb_interpolate(f, domain, tol: float = 1e-14, *, scale_floor: float = 0.0) -> ChebSeries:
    """Adaptively interpolate f on [a, b] to relative tolerance tol.

    f must accept a 1-D array of points and return the sampled values.
    Grids of 2^k + 1 Lobatto points are nested, so refinement reuses every
    previous sample.  Convergence: the trailing 20% of coefficients all fall
    below tol * max(max|coeff|, scale_floor); the returned series drops the
    sub-threshold trailing coefficients.  scale_floor lets a caller with a
    known global scale accept pieces whose local values are tiny.
    """
    a, b = float(domain[0]), float(domain[1])
    if not b > a:
        raise ValueError(f"empty interpolation domain [{a}, {b}]")
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    vals = None
    nodes = None
    prev_tail = None
    for k in range(_K_FIRST, _K_CAP + 1):
        num = 2 ** k
        nodes = _lobatto_nodes(a, b, num)
        if vals is None:
            vals = np.asarray(f(nodes), dtype=float)
        else:
            fresh = np.asarray(f(nodes[1::2]), dtype=float)
            merged = np.empty(num + 1)
            merged[::2] = vals
            merged[1::2] = fresh
            vals = merged
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"sampler returned non-finite values on [{a}, {b}]")
        coeffs = _vals_to_coeffs(vals)
        scale = max(float(np.abs(coeffs).max()), float(scale_floor))
        cut = tol * scale
        tail_len = max(1, int(np.ceil(_TAIL_FRACTION * coeffs.size)))
        tail_max = float(np.abs(coeffs[-tail_len:]).max())
        if tail_max <= cut:
            keep = np.nonzero(np.abs(coeffs) > cut)[0]
            last = int(keep[-1]) if keep.size else 0
            dropped = coeffs[last + 1:]
            return ChebSeries(coeffs=coeffs[:last + 1], domain=(a, b),
                              tail_bound=float(np.abs(dropped).max()) if dropped.size else 0.0)
        if (prev_tail is not None and k >= _K_STALL
                and tail_max > _STALL_RATIO * prev_tail):
            raise ChebConvergenceError(
                f"coefficient decay stalled at {num + 1} points on [{a}, {b}]",
                domain=(a, b), coeffs=coeffs, nodes=nodes, samples=vals,
                reason="stall")
        prev_tail = tail_max
    raise ChebConvergenceError(
        f"degree cap 2^{_K_CAP} reached without coefficient decay on [{a}, {b}]",
        domain=(a, b), coeffs=coeffs, nodes=nodes, samples=vals,
        reason="degree_cap")


def _max_by_sampling(series: ChebSeries):
    """Fallback maximizer: dense sampling plus one parabolic refinement."""
    a, b = series.domain
    num = max(10 * series.degree, 32)
    ts = np.linspace(a, b, num + 1)
    vs = series(ts)
    i = int(np.argmax(vs))
    if 0 < i < num:
        t3, v3 = ts[i - 1:i + 2], vs[i - 1:i + 2]
        denom = (v3[0] - 2.0 * v3[1] + v3[2])
        if denom < 0.0:
            t = t3[1] + 0.5 * (t3[0] - t3[1]) * (v3[0] - v3[2]) / denom
            if a <= t <= b and series(t) > vs[i]:
                return float(t), float(series(t))
    return float(ts[i]), float(vs[i])


def cheb_max(series: ChebSeries):
    """(theta*, value) maximizing the series over its domain.

    The derivative series' real roots (colleague-matrix eigenvalues) plus
    both endpoints are the candidates; ties go to the smaller theta.  Returns
    a third element marking whether the colleague solve had to fall back to
    dense sampling.
    """
    a, b = series.domain
    if series.degree == 0:
        return a, float(series.coeffs[0]), False
    dc = npcheb.chebder(series.coeffs)
    fallback = False
    roots = np.empty(0)
    if dc.size > 1 and np.any(dc != 0.0):
        try:
            r = npcheb.chebroots(dc)
        except np.linalg.LinAlgError:
            theta, value = _max_by_sampling(series)
            return theta, value, True
        r = r[np.abs(r.imag) <= 1e-8] if np.iscomplexobj(r) else r
        r = np.real(r)
        r = r[(r >= -1.0 - 1e-8) & (r <= 1.0 + 1e-8)]
        roots = np.clip(r, -1.0, 1.0)
    xs = np.concatenate((np.array([-1.0, 1.0]), roots))
    thetas = 0.5 * (a + b) + 0.5 * (b - a) * xs
    vals = npcheb.chebval(xs, series.coeffs)
    order = np.argsort(thetas, kind="stable")
    thetas, vals = thetas[order], vals[order]
    vmax = float(vals.max())
    tie = np.nonzero(vals >= vmax - _TIE_TOL * (1.0 + abs(vmax)))[0][0]
    return float(thetas[tie]), float(vals[tie]), fallback


def compute_radius_cheb(A, tol: float = 1e-14) -> RadiusResult:
    """Numerical radius via piecewise Chebyshev interpolation of h.

    Interpolates h on [0, 2pi] and maximizes the interpolant.  Intervals
    whose coefficients refuse to decay (kinks of h) are bisected at the
    sample with the largest second difference, up to depth 10.
    """
    A = as_matrix(A)
    t0 = time.perf_counter()
    smax = sigma_max(A)
    evals = 0

    def sampler(ts):
        nonlocal evals
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        evals += ts.size
        return eval_h_values(A, ts)

    pieces: list[ChebSeries] = []

    def interpolate_piece(dom, depth):
        try:
            pieces.append(cheb_interpolate(sampler, dom, tol, scale_floor=smax))
        except ChebConvergenceError as e:
            if depth >= _MAX_BISECT_DEPTH:
                raise
            split = _kink_split_point(e)
            interpolate_piece((dom[0], split), depth + 1)
            interpolate_piece((split, dom[1]), depth + 1)

    interpolate_piece((0.0, TWO_PI), 0)

    best_theta, best_val = None, -np.inf
    any_fallback = False
    for s in pieces:
        theta, val, fb = cheb_max(s)
        any_fallback = any_fallback or fb
        if val > best_val + _TIE_TOL * (1.0 + abs(val)) or (
                abs(val - best_val) <= _TIE_TOL * (1.0 + abs(val)) and theta < best_theta):
            best_theta, best_val = theta, val
    theta_star = best_theta % TWO_PI
    return RadiusResult(value=float(best_val), theta_star=float(theta_star),
                        method=Method.CHEB, iterations=len(pieces),
                        h_evals=evals, wall_seconds=time.perf_counter() - t0,
                        detail={"pieces": [s.domain for s in pieces],
                                "degrees": [s.degree for s in pieces],
                                "colleague_fallback": any_fallback})


def _kink_split_point(err: ChebConvergenceError) -> float:
    """Split location from the failed fit: largest second difference."""
    a, b = err.domain
    v = np.asarray(err.samples, dtype=float)
    nodes = np.asarray(err.nodes, dtype=float)
    d2 = np.abs(v[2:] - 2.0 * v[1:-1] + v[:-2])
    split = float(nodes[1 + int(np.argmax(d2))])
    width = b - a
    return min(max(split, a + 0.05 * width), b - 0.05 * width)
