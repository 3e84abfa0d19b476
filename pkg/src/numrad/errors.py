"""Exception types raised by the numerical-radius solvers."""

from __future__ import annotations


class NumradError(Exception):
    """Base class for all package-specific errors."""


class EigenSolveError(NumradError):
    """A dense eigenvalue or singular value computation failed."""

    def __init__(self, message: str, *, theta: float | None = None, n: int | None = None):
        super().__init__(message)
        self.theta = theta
        self.n = n


class PencilError(NumradError):
    """The generalized eigenvalue solve for a level-set pencil failed."""

    def __init__(self, message: str, *, gamma: float, n: int):
        super().__init__(message)
        self.gamma = gamma
        self.n = n


class ChebConvergenceError(NumradError):
    """Chebyshev coefficients failed to decay on the requested interval.

    Carries the last coefficient profile and the samples that produced it so
    the caller can locate a kink and bisect the domain.
    """

    def __init__(self, message: str, *, domain, coeffs, nodes, samples, reason: str):
        super().__init__(message)
        self.domain = tuple(domain)
        self.coeffs = coeffs
        self.nodes = nodes
        self.samples = samples
        self.reason = reason  # "degree_cap" or "stall"


class IterationCapError(NumradError):
    """An iteration cap was exceeded; carries the best iterate found."""

    def __init__(self, message: str, *, best_value: float, diagnostics: dict | None = None):
        super().__init__(message)
        self.best_value = best_value
        self.diagnostics = diagnostics or {}


class SdpSizeError(NumradError):
    """Matrix is larger than the dense barrier solver is willing to handle."""
