"""Numerical radius as a semidefinite program, solved by a log-det barrier.

r(A) is the optimal value of

    minimize c   subject to   M(c, Z) = [[cI + Z, A], [A^H, cI - Z]] >= 0

over real c and Hermitian Z (restricted to real symmetric when A is real,
shrinking the variable count from n^2 + 1 to n(n+1)/2 + 1).  The solver
follows the central path of

    phi_t(c, Z) = t*c - log det M(c, Z)

with damped Newton steps in the real coordinates of (c, Z) over a fixed
orthonormal Hermitian basis, multiplying t by 10 once the Newton decrement
drops below 1e-8.  The 2n-dimensional PSD cone gives the suboptimality
bound c - r(A) <= 2n/t, which drives termination.

Every feasible (c, Z) certifies r(A) <= c; ``check_certificate`` exposes
that check (lambda_min of the block matrix) independently of the solver.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import IterationCapError, SdpSizeError
from .spectral import (
    TWO_PI,
    HermitianMatrix,
    Matrix,
    Method,
    RadiusResult,
    as_matrix,
    sigma_max,
)

__all__ = ["SdpIterate", "assemble_block_matrix", "initial_point",
           "compute_radius_sdp", "check_certificate", "hermitian_basis"]

DECREMENT_TOL = 1e-8
T_FACTOR = 10.0
MAX_NEWTON_STEPS = 500
MAX_BACKTRACKS = 60
DEFAULT_SIZE_CAP = 50
_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class SdpIterate:
    """One strictly feasible barrier iterate (c, Z) at parameter t."""

    c: float
    Z: HermitianMatrix
    t: float
    feas_margin: float

    @property
    def gap_bound(self) -> float:
        return 2.0 * self.Z.m / self.t


def assemble_block_matrix(c: float, Z, A) -> HermitianMatrix:
    """The 2n-by-2n block matrix [[cI + Z, A], [A^H, cI - Z]]."""
    A = as_matrix(A)
    Zm = Z.entries if isinstance(Z, HermitianMatrix) else np.asarray(Z)
    if Zm.shape != (A.n, A.n):
        raise ValueError(f"Z has shape {Zm.shape}, expected {(A.n, A.n)}")
    E = A.entries.real if (A.is_real and not np.iscomplexobj(Zm)) else A.entries
    eye = np.eye(A.n, dtype=E.dtype)
    return HermitianMatrix(np.block([[c * eye + Zm, E], [E.conj().T, c * eye - Zm]]))


def initial_point(A) -> SdpIterate:
    """Strictly feasible start: Z = 0 and c slightly above sigma_max(A).

    With Z = 0 the block matrix is positive definite exactly when
    c > sigma_max(A).  The barrier parameter starts at 1/(1 + sigma_max).
    """
    A = as_matrix(A)
    smax = sigma_max(A)
    c0 = smax * 1.01 + 1e-8 * (1.0 + smax)
    dtype = np.float64 if A.is_real else np.complex128
    Z0 = HermitianMatrix(np.zeros((A.n, A.n), dtype=dtype))
    M0 = assemble_block_matrix(c0, Z0, A)
    feas = float(np.linalg.eigvalsh(M0.entries)[0])
    return SdpIterate(c=c0, Z=Z0, t=1.0 / (1.0 + smax), feas_margin=feas)


def check_certificate(A, c: float, Z) -> float:
    """lambda_min of M(c, Z); >= 0 proves r(A) <= c."""
    M = assemble_block_matrix(c, Z, A)
    return float(np.linalg.eigvalsh(M.entries)[0])


def hermitian_basis(n: int, real: bool) -> np.ndarray:
    """Stacked orthonormal basis of the (real or complex) Hermitian space.

    Order: n diagonal units; (e_i e_j^T + e_j e_i^T)/sqrt2 for i<j; and, in
    the complex case, i(e_i e_j^T - e_j e_i^T)/sqrt2 for i<j.  Orthonormal
    under <X, Y> = trace(XY).
    """
    dtype = np.float64 if real else np.complex128
    iu, ju = np.triu_indices(n, 1)
    npairs = iu.size
    m = n + npairs if real else n * n
    basis = np.zeros((m, n, n), dtype=dtype)
    for i in range(n):
        basis[i, i, i] = 1.0
    r = np.arange(npairs)
    basis[n + r, iu, ju] = 1.0 / _SQRT2
    basis[n + r, ju, iu] = 1.0 / _SQRT2
    if not real:
        basis[n + npairs + r, iu, ju] = 1.0j / _SQRT2
        basis[n + npairs + r, ju, iu] = -1.0j / _SQRT2
    return basis


class _ZSpace:
    """Coordinate maps between Hermitian matrices and the basis above."""

    def __init__(self, n: int, real: bool):
        self.n = n
        self.real = real
        self.iu = np.triu_indices(n, 1)
        self.dim = n + self.iu[0].size * (1 if real else 2)

    def coords(self, S: np.ndarray) -> np.ndarray:
        parts = [S.diagonal().real, _SQRT2 * S[self.iu].real]
        if not self.real:
            parts.append(_SQRT2 * S[self.iu].imag)
        return np.concatenate(parts)

    def matrix(self, z: np.ndarray) -> np.ndarray:
        n = self.n
        npairs = self.iu[0].size
        off = z[n:n + npairs] / _SQRT2
        if self.real:
            Z = np.zeros((n, n))
            Z[self.iu] = off
            Z = Z + Z.T
        else:
            Z = np.zeros((n, n), dtype=np.complex128)
            Z[self.iu] = off + 1j * z[n + npairs:] / _SQRT2
            Z = Z + Z.conj().T
        np.fill_diagonal(Z, z[:n])
        return Z


def _pair_traces(F: np.ndarray, basis_t_flat_re, basis_t_flat_im):
    """Matrix of Re trace(F_j E_k) over the basis, via real GEMMs."""
    m = F.shape[0]
    Ff = F.reshape(m, -1)
    if basis_t_flat_im is None:
        return Ff @ basis_t_flat_re.T
    return Ff.real @ basis_t_flat_re.T - Ff.imag @ basis_t_flat_im.T


def compute_radius_sdp(A, tol: float = 1e-8, *, size_cap: int = DEFAULT_SIZE_CAP,
                       trace_csv=None) -> RadiusResult:
    """Numerical radius via the barrier method on the SDP characterization.

    Returns c from the final barrier iterate; result.detail carries the
    certificate ("certificate_c", "certificate_Z"), its lambda_min
    ("certificate_margin"), the variable count, and the final gap bound.
    When ``trace_csv`` is a path, one (t, c, decrement, gap_bound) row is
    appended per Newton iteration.

    The dense Hessian has (n^2+1)^2 entries, so the solver refuses n beyond
    ``size_cap`` (default 50) rather than silently grinding.
    """
    if not (1e-12 < tol < 1e-2):
        raise ValueError(f"tol must lie in (1e-12, 1e-2), got {tol}")
    A = as_matrix(A)
    t_start = time.perf_counter()
    n = A.n
    if n > size_cap:
        raise SdpSizeError(
            f"n={n} exceeds the dense barrier solver cap ({size_cap}); "
            f"the Hessian would have {(n * n + 1) ** 2} entries")
    smax = sigma_max(A)
    if smax == 0.0:
        # Exact optimum of the SDP at A = 0: c = 0, Z = 0.
        Z0 = HermitianMatrix(np.zeros((n, n)))
        return RadiusResult(value=0.0, theta_star=0.0, method=Method.SDP,
                            iterations=0, h_evals=0,
                            wall_seconds=time.perf_counter() - t_start,
                            detail={"certificate_c": 0.0, "certificate_Z": Z0,
                                    "certificate_margin": 0.0, "gap_bound": 0.0,
                                    "num_variables": 1, "newton_steps": 0})

    real = A.is_real
    E = A.entries.real.copy() if real else A.entries
    space = _ZSpace(n, real)
    m = space.dim
    basis = hermitian_basis(n, real)
    basis_t = np.ascontiguousarray(basis.transpose(0, 2, 1)).reshape(m, n * n)
    if real:
        bt_re, bt_im = basis_t, None
    else:
        bt_re, bt_im = np.ascontiguousarray(basis_t.real), np.ascontiguousarray(basis_t.imag)

    start = initial_point(A)
    c = start.c
    z = np.zeros(m)
    t_bar = start.t
    eye2n = np.eye(2 * n, dtype=E.dtype)

    def assemble(c_val, z_vec):
        return assemble_block_matrix(c_val, space.matrix(z_vec), A).entries

    def chol_logdet(Mmat):
        """(cholesky factor, log det) or (None, None) if not PD."""
        try:
            L = np.linalg.cholesky(Mmat)
        except np.linalg.LinAlgError:
            return None, None
        return L, 2.0 * float(np.log(np.diag(L).real).sum())

    M = assemble(c, z)
    L, logdet = chol_logdet(M)
    assert L is not None  # initial point is strictly feasible by construction

    writer = None
    trace_fh = None
    if trace_csv is not None:
        trace_fh = open(trace_csv, "w", newline="")
        writer = csv.writer(trace_fh)
        writer.writerow(["t", "c", "decrement", "gap_bound"])

    newton_steps = 0
    stalled = False
    try:
        while True:
            # Inner loop: Newton on phi_t to the central point for this t.
            dec_prev = np.inf
            while True:
                W = scipy.linalg.cho_solve((L, True), eye2n)
                W = (W + W.conj().T) * 0.5
                W11, W12 = W[:n, :n], W[:n, n:]
                W21, W22 = W[n:, :n], W[n:, n:]
                g_c = t_bar - float(np.trace(W).real)
                g_z = -space.coords(W11 - W22)
                W2 = W @ W
                H_cc = float(np.trace(W2).real)
                H_cz = space.coords(W2[:n, :n] - W2[n:, n:])
                G = (np.matmul(np.matmul(W11, basis), W11)
                     + np.matmul(np.matmul(W22, basis), W22)
                     - np.matmul(np.matmul(W12, basis), W21)
                     - np.matmul(np.matmul(W21, basis), W12))
                H_zz = _pair_traces(G, bt_re, bt_im)
                H = np.empty((m + 1, m + 1))
                H[0, 0] = H_cc
                H[0, 1:] = H_cz
                H[1:, 0] = H_cz
                H[1:, 1:] = (H_zz + H_zz.T) * 0.5
                g = np.concatenate(([g_c], g_z))

                ridge = 0.0
                for _ in range(4):
                    try:
                        cf = scipy.linalg.cho_factor(
                            H if ridge == 0.0 else H + ridge * np.eye(m + 1))
                        break
                    except np.linalg.LinAlgError:
                        ridge = max(ridge * 100.0, 1e-12 * np.trace(H) / (m + 1))
                else:
                    raise IterationCapError(
                        "barrier Hessian factorization failed",
                        best_value=float(c),
                        diagnostics={"t": t_bar, "gap_bound": 2.0 * n / t_bar})
                d = scipy.linalg.cho_solve(cf, -g)
                dec = float(np.sqrt(max(-g @ d, 0.0)))
                if writer is not None:
                    writer.writerow([f"{t_bar:.17g}", f"{c:.17g}",
                                     f"{dec:.17g}", f"{2.0 * n / t_bar:.17g}"])
                if dec <= DECREMENT_TOL:
                    break
                newton_steps += 1
                if newton_steps > MAX_NEWTON_STEPS:
                    raise IterationCapError(
                        f"Newton step cap {MAX_NEWTON_STEPS} exceeded",
                        best_value=float(c),
                        diagnostics={"t": t_bar, "gap_bound": 2.0 * n / t_bar,
                                     "decrement": dec})
                phi = t_bar * c - logdet
                step = 1.0 if dec <= 0.25 else 1.0 / (1.0 + dec)
                accepted = False
                for _ in range(MAX_BACKTRACKS + 1):
                    c_try = c + step * d[0]
                    z_try = z + step * d[1:]
                    M_try = assemble(c_try, z_try)
                    L_try, logdet_try = chol_logdet(M_try)
                    if L_try is not None:
                        phi_try = t_bar * c_try - logdet_try
                        if phi_try <= phi + 1e-10 * (1.0 + abs(phi)):
                            c, z, M, L, logdet = c_try, z_try, M_try, L_try, logdet_try
                            accepted = True
                            break
                    step *= 0.5
                if not accepted:
                    # Step length underflow: double precision cannot improve
                    # this central point any further.
                    stalled = True
                    break
            if 2.0 * n / t_bar <= tol * (1.0 + abs(c)):
                break
            if stalled and dec > 1.0:
                raise IterationCapError(
                    "barrier solve stalled far from the central path",
                    best_value=float(c),
                    diagnostics={"t": t_bar, "gap_bound": 2.0 * n / t_bar,
                                 "decrement": dec})
            t_bar *= T_FACTOR
    finally:
        if trace_fh is not None:
            trace_fh.close()

    Z_out = HermitianMatrix(space.matrix(z))
    margin = check_certificate(A, c, Z_out)
    theta_star, rayleigh = _maximizer_angle(A, assemble(c, z))
    return RadiusResult(
        value=float(c), theta_star=theta_star, method=Method.SDP,
        iterations=newton_steps, h_evals=0,
        wall_seconds=time.perf_counter() - t_start,
        detail={"certificate_c": float(c), "certificate_Z": Z_out,
                "certificate_margin": margin, "gap_bound": 2.0 * n / t_bar,
                "num_variables": m + 1, "newton_steps": newton_steps,
                "stalled": stalled, "rayleigh": rayleigh})


def _maximizer_angle(A: Matrix, M_final: np.ndarray):
    """Estimate a maximizing angle from the near-null space of M.

    At the exact optimum M is singular and its null vector (x, y) encodes a
    unit vector v with |v^H A v| = r(A); theta* = -arg(v^H A v).  The final
    iterate is only near-singular, so the best of the candidates x, y, x - y
    is used.  Falls back to theta = 0 when the Rayleigh quotient vanishes.
    """
    n = A.n
    u = np.linalg.eigh(M_final)[1][:, 0]
    x, y = u[:n], u[n:]
    best_w = 0.0 + 0.0j
    for v in (x, y, x - y):
        nv = np.linalg.norm(v)
        if nv < 1e-12:
            continue
        w = complex(np.vdot(v, A.entries @ (v / nv)) / nv)
        if abs(w) > abs(best_w):
            best_w = w
    if abs(best_w) == 0.0:
        return 0.0, 0.0
    return float((-np.angle(best_w)) % TWO_PI), abs(best_w)
