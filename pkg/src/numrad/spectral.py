"""Spectral primitives shared by every numerical-radius method.

All methods in this package maximize the same scalar function

    h(theta) = lambda_max( H(theta) ),      H(theta) = (e^{i theta} A + e^{-i theta} A^H) / 2,

the support function of the field of values of A in direction theta.  The
numerical radius is max_theta h(theta).  This module owns the construction
of the Hermitian family H, the evaluation of h and its theta-derivative,
and the spectral bounds (largest singular value, spectral radius) used for
seeding and sanity checks.

Everything here is a pure function of its arguments; the wrapped arrays are
made read-only so values can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import EigenSolveError

__all__ = [
    "Matrix",
    "HermitianMatrix",
    "EigPair",
    "Method",
    "RadiusResult",
    "as_matrix",
    "build_h_matrix",
    "eval_h",
    "eval_h_values",
    "eval_h_derivative",
    "sigma_max",
    "spectral_radius",
]

TWO_PI = 2.0 * np.pi

# Relative spectral gap below which lambda_max is treated as (near-)multiple
# and first-order derivative information is flagged as unreliable.
DEGENERACY_GAP = 1e-10


@dataclass(frozen=True, eq=False)
class Matrix:
    """Dense square complex matrix.  Real inputs are the zero-imaginary case."""

    entries: np.ndarray
    n: int = field(init=False)
    is_real: bool = field(init=False)

    def __post_init__(self):
        e = np.asarray(self.entries)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] < 1:
            raise ValueError(f"expected a square n-by-n array, got shape {e.shape}")
        e = np.array(e, dtype=np.complex128, order="C")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "n", e.shape[0])
        object.__setattr__(self, "is_real", bool(np.all(e.imag == 0.0)))


def as_matrix(a) -> Matrix:
    """Coerce an array-like (or pass through a Matrix) to a Matrix."""
    if isinstance(a, Matrix):
        return a
    return Matrix(np.asarray(a))


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Hermitian matrix; construction symmetrizes, so M == M^H holds exactly."""

    entries: np.ndarray
    m: int = field(init=False)

    def __post_init__(self):
        e = np.asarray(self.entries)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] < 1:
            raise ValueError(f"expected a square array, got shape {e.shape}")
        # (M + M^H)/2 is exactly equal to its own conjugate transpose in
        # floating point: entry (i,j) and entry (j,i) are computed from the
        # same two numbers.
        e = (e + e.conj().T) * 0.5
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "m", e.shape[0])


@dataclass(frozen=True, eq=False)
class EigPair:
    """Largest eigenvalue of a Hermitian matrix with a unit eigenvector.

    ``near_degenerate`` is set when the gap to the second-largest eigenvalue
    is below DEGENERACY_GAP relative to ||H||, in which case the eigenvector
    (and any derivative built from it) is not uniquely determined.
    """

    value: float
    vector: np.ndarray
    near_degenerate: bool = False


class Method(str, Enum):
    LSO = "lso"
    CHEB = "cheb"
    SDP = "sdp"
    GRID = "grid"

    def __str__(self) -> str:  # so CSV/JSON render as the bare tag
        return self.value


@dataclass(frozen=True, eq=False)
class RadiusResult:
    """Outcome of one numerical-radius computation.

    ``detail`` carries method-specific diagnostics (level sequences,
    certificates, piece counts, ...) and is not part of the stable contract.
    """

    value: float
    theta_star: float
    method: Method
    iterations: int
    h_evals: int
    wall_seconds: float
    detail: dict = field(default_factory=dict)


def build_h_matrix(A: Matrix | np.ndarray, theta: float) -> HermitianMatrix:
    """Hermitian part of e^{i theta} A, i.e. H(theta) in the objective."""
    A = as_matrix(A)
    return HermitianMatrix(np.exp(1j * theta) * A.entries)


def _fix_vector_phase(v: np.ndarray) -> np.ndarray:
    """Rotate v so its first nonzero component is real positive."""
    nz = np.nonzero(np.abs(v) > 1e-12)[0]
    i = nz[0] if nz.size else int(np.argmax(np.abs(v)))
    pivot = v[i]
    if pivot != 0:
        v = v * (pivot.conjugate() / abs(pivot))
    return v


def eval_h(A: Matrix | np.ndarray, theta: float) -> EigPair:
    """h(theta) together with a (phase-fixed) unit eigenvector."""
    A = as_matrix(A)
    H = build_h_matrix(A, theta)
    try:
        w, V = np.linalg.eigh(H.entries)
    except np.linalg.LinAlgError as e:
        raise EigenSolveError(f"eigh failed for H(theta), n={A.n}, theta={theta}",
                              theta=float(theta), n=A.n) from e
    lam = float(w[-1])
    v = _fix_vector_phase(V[:, -1].copy())
    scale = max(abs(float(w[0])), abs(lam))
    near = A.n > 1 and (lam - float(w[-2])) < DEGENERACY_GAP * max(scale, 1e-300)
    return EigPair(value=lam, vector=v, near_degenerate=near)


def eval_h_values(A: Matrix | np.ndarray, thetas, chunk: int = 8192) -> np.ndarray:
    """h at many angles via stacked Hermitian eigensolves (values only)."""
    A = as_matrix(A)
    th = np.atleast_1d(np.asarray(thetas, dtype=float))
    out = np.empty(th.shape[0])
    E = A.entries
    for s in range(0, th.shape[0], chunk):
        phases = np.exp(1j * th[s:s + chunk])[:, None, None]
        B = phases * E
        Hs = (B + B.conj().transpose(0, 2, 1)) * 0.5
        try:
            out[s:s + chunk] = np.linalg.eigvalsh(Hs)[:, -1]
        except np.linalg.LinAlgError as e:
            raise EigenSolveError(f"batched eigvalsh failed, n={A.n}", n=A.n) from e
    return out


def eval_h_derivative(A: Matrix | np.ndarray, theta: float, v: np.ndarray) -> float:
    """d/dtheta of the lambda_max branch through the eigenvector v.

    First-order perturbation: h'(theta) = v^H H'(theta) v with
    H'(theta) = (i e^{i theta} A - i e^{-i theta} A^H)/2.  Valid when
    lambda_max is simple; for (near-)multiple lambda_max the value is still
    returned but callers should rely on EigPair.near_degenerate.
    """
    A = as_matrix(A)
    Hp = build_h_matrix(A, theta + 0.5 * np.pi)  # i e^{i theta} A symmetrized
    val = complex(np.vdot(v, Hp.entries @ v))
    scale = 1.0 + abs(val) + float(np.abs(Hp.entries).sum(axis=1).max())
    if abs(val.imag) > 1e-12 * scale:
        raise EigenSolveError(
            f"derivative has non-negligible imaginary part {val.imag:.3e}",
            theta=float(theta), n=A.n)
    return float(val.real)


def sigma_max(A: Matrix | np.ndarray) -> float:
    """Largest singular value of A."""
    A = as_matrix(A)
    try:
        return float(np.linalg.svd(A.entries, compute_uv=False)[0])
    except np.linalg.LinAlgError as e:
        raise EigenSolveError(f"SVD failed, n={A.n}", n=A.n) from e


def spectral_radius(A: Matrix | np.ndarray) -> float:
    """Largest eigenvalue modulus of A."""
    A = as_matrix(A)
    try:
        return float(np.abs(np.linalg.eigvals(A.entries)).max())
    except np.linalg.LinAlgError as e:
        raise EigenSolveError(f"eigenvalue solve failed, n={A.n}", n=A.n) from e
