"""Matrix Market reading and writing for dense real/complex matrices.

Parsing and formatting are delegated to scipy.io; this module pins the
conventions used by the rest of the package: matrices are dense and square,
real matrices are written with field "real", complex ones with field
"complex", and values are printed with enough digits that reading the file
back reproduces them to within 1 ulp.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.io
import scipy.sparse

from .spectral import Matrix, as_matrix

__all__ = ["read_matrix", "write_matrix"]


def read_matrix(path: str | os.PathLike) -> Matrix:
    """Read a Matrix Market file (array or coordinate format) as a Matrix."""
    try:
        data = scipy.io.mmread(os.fspath(path))
    except OSError as e:
        raise OSError(f"cannot read Matrix Market file {path!r}: {e}") from e
    if scipy.sparse.issparse(data):
        data = data.toarray()
    arr = np.asarray(data)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{path!r} holds a {arr.shape} matrix; expected square")
    return as_matrix(arr)


def write_matrix(path: str | os.PathLike, A: Matrix | np.ndarray, fmt: str = "array") -> None:
    """Write A in Matrix Market format ("array" dense or "coordinate")."""
    A = as_matrix(A)
    if fmt not in ("array", "coordinate"):
        raise ValueError(f"fmt must be 'array' or 'coordinate', got {fmt!r}")
    payload = A.entries.real.copy() if A.is_real else A.entries
    field = "real" if A.is_real else "complex"
    if fmt == "coordinate":
        payload = scipy.sparse.coo_matrix(payload)
    try:
        # 17 significant digits round-trip IEEE doubles exactly.
        scipy.io.mmwrite(os.fspath(path), payload, field=field, precision=17,
                         symmetry="general")
    except OSError as e:
        raise OSError(f"cannot write Matrix Market file {path!r}: {e}") from e
