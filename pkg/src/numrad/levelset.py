"""Level-set computation of the numerical radius.

The method alternates two ingredients:

* local maximization of h(theta) from candidate angles (safeguarded Newton
  on h', with derivative-sign bisection near eigenvalue coalescence), and
* certification of the best level gamma found so far: the angles where
  h(theta) = gamma are exactly the unit-circle solutions z = e^{i theta} of
  det(z^2 A - 2 gamma z I + A^H) = 0,
  obtained from a 2n-by-2n companion linearization of that quadratic pencil.

If the inflated level gamma*(1 + 2 tol) has no crossings, gamma is a
certified global maximum.  Otherwise every open interval where h exceeds the
level contains a better maximizer, and the search restarts from the interval
midpoints.  Matrices with (numerically) constant h make the pencil singular;
those fall back to the grid oracle.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import IterationCapError, PencilError
from .grid import compute_radius_grid
from .spectral import (
    TWO_PI,
    DEGENERACY_GAP,
    Matrix,
    Method,
    RadiusResult,
    as_matrix,
    build_h_matrix,
    eval_h_values,
    sigma_max,
)

__all__ = ["LevelCrossings", "LocalMax", "level_crossings", "local_maximize",
           "compute_radius_lso"]

# Unit-circle acceptance for pencil eigenvalues, and the h-based confirmation
# tolerance for the resulting angles.  Pencil eigenvalues of the doubled
# problem are less accurate than direct h evaluations, so candidate crossings
# are always re-checked against h.
UNIT_CIRCLE_TOL = 1e-8
CROSSING_CONFIRM_TOL = 1e-8
# Relative rank threshold under which the pencil counts as singular on the
# whole unit circle (constant-h degeneracy).
PENCIL_RANK_TOL = 1e-10
_DEDUPE_TOL = 1e-10

# Fixed low-discrepancy probe angles for the rank/residual degeneracy test.
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
_PROBE_ANGLES = np.sort((0.5 + np.arange(8) * _GOLDEN) % 1.0) * TWO_PI


@dataclass(frozen=True, eq=False)
class LevelCrossings:
    """Angles in [0, 2pi) where h equals the level gamma.

    whole_circle is set when h >= gamma everywhere with no transversal
    crossing: either the pencil is singular on the whole circle (constant-h
    degeneracy, also flagged via ``degenerate``) or every sampled h value
    exceeds gamma.
    """

    gamma: float
    angles: np.ndarray
    whole_circle: bool
    degenerate: bool = False


class LocalMax(NamedTuple):
    theta: float
    value: float
    evals: int
    converged: bool


def _h_with_derivatives(A: Matrix, theta: float):
    """(h, h', h'', flagged) at theta from one full Hermitian decomposition.

    h'' comes from second-order eigenvalue perturbation,
    h'' = -h + 2 sum_j |u_j^H H'(theta) v|^2 / (h - w_j),
    using H'' = -H.  ``flagged`` marks a (near-)multiple lambda_max, where
    both derivatives are unreliable.
    """
    H = build_h_matrix(A, theta)
    w, V = np.linalg.eigh(H.entries)
    lam = float(w[-1])
    v = V[:, -1]
    Hp = build_h_matrix(A, theta + 0.5 * np.pi)  # H'(theta)
    Hpv = Hp.entries @ v
    d1 = float(np.vdot(v, Hpv).real)
    if A.n == 1:
        return lam, d1, -lam, False
    scale = max(abs(float(w[0])), abs(lam), 1e-300)
    gap = lam - float(w[-2])
    flagged = gap < DEGENERACY_GAP * scale
    if flagged:
        return lam, d1, np.nan, True
    cross = V[:, :-1].conj().T @ Hpv
    d2 = -lam + 2.0 * float(np.sum(np.abs(cross) ** 2 / (lam - w[:-1])))
    return lam, d1, d2, False


def local_maximize(A, theta0: float, tol: float, max_iter: int = 100) -> LocalMax:
    """Climb h from theta0 to a local maximizer.

    Terminates when |h'| <= tol*(1+h) or when the bracketing interval around
    the maximizer is narrower than tol.  The reported value is the best h
    seen, so it is monotone in the iteration count and never below h(theta0).
    """
    A = as_matrix(A)
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    evals = 0

    def probe(t):
        nonlocal evals
        evals += 1
        return _h_with_derivatives(A, t)

    def grad_small(d1, h):
        return abs(d1) <= tol * (1.0 + abs(h))

    h0, d10, d20, fl0 = probe(theta0)
    best_t, best_h = theta0, h0
    if grad_small(d10, h0) and (fl0 or d20 <= 0.0):
        return LocalMax(theta0 % TWO_PI, h0, evals, True)

    # Bracket hunt: walk uphill with growing steps until h' changes sign.
    s = 1.0 if d10 >= 0.0 else -1.0
    step = 0.02
    t_prev, h_prev, d_prev, d2_prev, fl_prev = theta0, h0, d10, d20, fl0
    bracket = None
    traveled = 0.0
    iters = 0
    while traveled <= TWO_PI and iters < max_iter:
        t_new = t_prev + s * step
        h_new, d1_new, d2_new, fl_new = probe(t_new)
        iters += 1
        if h_new > best_h:
            best_t, best_h = t_new, h_new
        if d1_new * s < 0.0:
            if s > 0:
                lo = (t_prev, h_prev, d_prev, d2_prev, fl_prev)
                hi = (t_new, h_new, d1_new, d2_new, fl_new)
            else:
                lo = (t_new, h_new, d1_new, d2_new, fl_new)
                hi = (t_prev, h_prev, d_prev, d2_prev, fl_prev)
            bracket = (lo, hi)
            break
        if h_new < h_prev:
            # Stepped over the maximum without seeing the sign flip
            # (possible at kinks); retry with a smaller step.
            step *= 0.25
            if step < min(tol, 1e-15):
                return LocalMax(best_t % TWO_PI, best_h, evals, True)
            continue
        if grad_small(d1_new, h_new) and (fl_new or d2_new <= 0.0):
            return LocalMax(t_new % TWO_PI, h_new, evals, True)
        traveled += step
        t_prev, h_prev, d_prev, d2_prev, fl_prev = t_new, h_new, d1_new, d2_new, fl_new
        step *= 2.0
    if bracket is None:
        # A full turn without a descent: h is numerically constant (or the
        # iteration cap was hit during the walk).
        return LocalMax(best_t % TWO_PI, best_h, evals, iters < max_iter)

    # Safeguarded Newton on h' inside the bracket; bisection on the sign of
    # h' whenever curvature information is unusable.
    (t_lo, h_lo, d_lo, d2_lo, fl_lo), (t_hi, h_hi, d_hi, d2_hi, fl_hi) = bracket
    cur = (t_lo, h_lo, d_lo, d2_lo, fl_lo) if h_lo >= h_hi else (t_hi, h_hi, d_hi, d2_hi, fl_hi)
    while iters < max_iter:
        width = t_hi - t_lo
        if width <= tol:
            return LocalMax(best_t % TWO_PI, best_h, evals, True)
        t_c, h_c, d_c, d2_c, fl_c = cur
        t_n = None
        if not fl_c and np.isfinite(d2_c) and d2_c < 0.0:
            cand = t_c - d_c / d2_c
            if t_lo < cand < t_hi and abs(cand - t_c) > 1e-18:
                t_n = cand
        if t_n is None:
            t_n = 0.5 * (t_lo + t_hi)
        h_n, d1_n, d2_n, fl_n = probe(t_n)
        iters += 1
        if h_n > best_h:
            best_t, best_h = t_n, h_n
        if grad_small(d1_n, h_n):
            return LocalMax(best_t % TWO_PI, best_h, evals, True)
        if d1_n > 0.0:
            t_lo, h_lo, d_lo = t_n, h_n, d1_n
        else:
            t_hi, h_hi, d_hi = t_n, h_n, d1_n
        cur = (t_n, h_n, d1_n, d2_n, fl_n)
    return LocalMax(best_t % TWO_PI, best_h, evals, False)


def _level_crossings_counted(A: Matrix, gamma: float):
    """level_crossings plus the number of h evaluations it spent."""
    n = A.n
    E = A.entries
    evals = 0

    # Rank/residual degeneracy probe.  On |z| = 1 the quadratic pencil
    # satisfies Q(e^{it}) = 2 e^{it} (H(t) - gamma I), so its singular values
    # there are 2|w_i(t) - gamma|.  A negligible min/max ratio at every probe
    # angle means gamma stays in the spectrum for all t: singular pencil.
    phases = np.exp(1j * _PROBE_ANGLES)[:, None, None]
    B = phases * E
    Hs = (B + B.conj().transpose(0, 2, 1)) * 0.5
    w = np.linalg.eigvalsh(Hs)
    evals += len(_PROBE_ANGLES)
    h_probes = w[:, -1]
    dist = np.abs(w - gamma)
    dmin = dist.min(axis=1)
    dmax = dist.max(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = np.where(dmax > 0.0, dmin / np.where(dmax > 0, dmax, 1.0), 0.0)
    if np.all(ratios <= PENCIL_RANK_TOL):
        return LevelCrossings(gamma=float(gamma), angles=np.empty(0),
                              whole_circle=True, degenerate=True), evals

    # Companion linearization z*diag(A, I) - [[2 gamma I, -A^H], [I, 0]].
    eye = np.eye(n, dtype=np.complex128)
    zero = np.zeros((n, n), dtype=np.complex128)
    C = np.block([[2.0 * gamma * eye, -E.conj().T], [eye, zero]])
    D = np.block([[E, zero], [zero, eye]])
    try:
        alpha, beta = scipy.linalg.eig(C, D, right=False, homogeneous_eigvals=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise PencilError(f"generalized eigensolve failed at level {gamma}",
                          gamma=float(gamma), n=n) from e
    eps = np.finfo(float).eps
    small_a = np.abs(alpha) <= 100.0 * eps * max(np.abs(C).sum(axis=0).max(), 1e-300)
    small_b = np.abs(beta) <= 100.0 * eps * max(np.abs(D).sum(axis=0).max(), 1e-300)
    if int(np.count_nonzero(small_a & small_b)) >= 2 * n:
        return LevelCrossings(gamma=float(gamma), angles=np.empty(0),
                              whole_circle=True, degenerate=True), evals
    finite = ~small_b
    z = alpha[finite] / beta[finite]
    z = z[np.abs(np.abs(z) - 1.0) <= UNIT_CIRCLE_TOL]
    angles = np.sort(np.angle(z) % TWO_PI)
    if angles.size:
        hv = eval_h_values(A, angles)
        evals += angles.size
        angles = angles[np.abs(hv - gamma) <= CROSSING_CONFIRM_TOL * (1.0 + abs(gamma))]
    if angles.size > 1:
        keep = np.concatenate(([True], np.diff(angles) > _DEDUPE_TOL))
        angles = angles[keep]
        if angles.size > 1 and (angles[0] + TWO_PI - angles[-1]) <= _DEDUPE_TOL:
            angles = angles[:-1]
    if angles.size > 2 * n:
        # More crossings than the pencil has roots: numerically degenerate.
        return LevelCrossings(gamma=float(gamma), angles=np.empty(0),
                              whole_circle=True, degenerate=True), evals
    whole = angles.size == 0 and float(h_probes.min()) > gamma
    return LevelCrossings(gamma=float(gamma), angles=angles,
                          whole_circle=whole, degenerate=False), evals


def level_crossings(A, gamma: float) -> LevelCrossings:
    """All angles in [0, 2pi) with h(theta) = gamma, via the quadratic pencil."""
    A = as_matrix(A)
    out, _ = _level_crossings_counted(A, float(gamma))
    return out


def _seed_angles(A: Matrix) -> np.ndarray:
    """Candidate angles from the eigenvalues of A, plus theta = 0.

    For an eigenpair (lam, v) one has h(-arg lam) >= |lam|, so both the
    eigenvalue arguments and their negatives are included; theta = 0 covers
    nilpotent A, whose spectrum carries no direction information.
    """
    lam = np.linalg.eigvals(A.entries)
    lam = lam[np.abs(lam) > 0.0]
    cand = np.concatenate(([0.0], (-np.angle(lam)) % TWO_PI, np.angle(lam) % TWO_PI))
    cand = np.sort(cand)
    keep = np.concatenate(([True], np.diff(cand) > 1e-8))
    return cand[keep]


def compute_radius_lso(A, tol_rel: float = 1e-14, *, max_outer: int = 50,
                       seed_strategy: str = "best") -> RadiusResult:
    """Numerical radius by level-set certified local maximization.

    seed_strategy "best" evaluates h at every candidate angle in one batched
    solve and climbs only from the best one (any basin missed that way is
    recovered by the level-set rounds); "all" climbs from every candidate.
    """
    if not (0.0 < tol_rel < 1e-2):
        raise ValueError(f"tol_rel must lie in (0, 1e-2), got {tol_rel}")
    if seed_strategy not in ("best", "all"):
        raise ValueError(f"unknown seed_strategy {seed_strategy!r}")
    A = as_matrix(A)
    t0 = time.perf_counter()
    smax = sigma_max(A)
    if smax == 0.0:
        return RadiusResult(value=0.0, theta_star=0.0, method=Method.LSO,
                            iterations=0, h_evals=0,
                            wall_seconds=time.perf_counter() - t0,
                            detail={"levels": [0.0], "certified": True,
                                    "degenerate": False})
    evals = 0
    seeds = _seed_angles(A)
    hs = eval_h_values(A, seeds)
    evals += seeds.size
    if seed_strategy == "best":
        starts = [float(seeds[int(np.argmax(hs))])]
    else:
        starts = [float(t) for t in seeds]

    gamma = -np.inf
    theta_star = 0.0
    for t in starts:
        res = local_maximize(A, t, tol_rel)
        evals += res.evals
        if res.value > gamma:
            gamma, theta_star = res.value, res.theta
    # Seeds include theta = 0 and the supporting angles of all eigenvalues,
    # so the best climbed value is strictly positive for any nonzero A.
    assert gamma > 0.0

    levels = [gamma]
    certified = False
    outer = 0
    while outer < max_outer:
        outer += 1
        gamma_cert = gamma * (1.0 + 2.0 * tol_rel)
        crossings, used = _level_crossings_counted(A, gamma_cert)
        evals += used
        if crossings.whole_circle:
            # Constant-h degeneracy: certify by brute force instead.
            g = compute_radius_grid(A)
            value = max(gamma, g.value)
            theta = theta_star if gamma >= g.value else g.theta_star
            return RadiusResult(value=value, theta_star=float(theta % TWO_PI),
                                method=Method.LSO, iterations=outer,
                                h_evals=evals + g.h_evals,
                                wall_seconds=time.perf_counter() - t0,
                                detail={"levels": levels, "certified": False,
                                        "degenerate": True})
        if crossings.angles.size == 0:
            certified = True
            break
        ang = crossings.angles
        mids = (ang + np.diff(np.concatenate((ang, [ang[0] + TWO_PI]))) / 2.0) % TWO_PI
        h_mids = eval_h_values(A, mids)
        evals += mids.size
        above = np.nonzero(h_mids > gamma_cert)[0]
        if above.size == 0:
            certified = True
            break
        new_gamma, new_theta = gamma, theta_star
        for i in above:
            res = local_maximize(A, float(mids[i]), tol_rel)
            evals += res.evals
            if res.value > new_gamma:
                new_gamma, new_theta = res.value, res.theta
        if new_gamma <= gamma:
            # Should be impossible (h(mid) > gamma_cert > gamma); stop rather
            # than loop on a numerically stuck level.
            certified = True
            break
        gamma, theta_star = new_gamma, new_theta
        levels.append(gamma)
    if not certified:
        raise IterationCapError(
            f"level-set outer iteration cap {max_outer} exceeded",
            best_value=float(gamma),
            diagnostics={"levels": levels, "h_evals": evals})
    return RadiusResult(value=float(gamma), theta_star=float(theta_star % TWO_PI),
                        method=Method.LSO, iterations=outer, h_evals=evals,
                        wall_seconds=time.perf_counter() - t0,
                        detail={"levels": levels, "certified": True,
                                "degenerate": False,
                                "final_crossing_count": 0})
