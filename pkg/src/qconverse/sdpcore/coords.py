"""Isometric real coordinates for Hermitian and real-symmetric matrices.

For a complex block of size n the coordinate vector has n*n entries::

    [X_00, ..., X_{n-1,n-1} | sqrt2 Re X_ij (i<j) | sqrt2 Im X_ij (i<j)]

and ``hvec(X) @ hvec(Y) == Re tr(X Y)``. Real blocks drop the imaginary
part and have n(n+1)/2 coordinates.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

SQRT2 = np.sqrt(2.0)


def coord_size(n: int, field: str = "complex") -> int:
    return n * n if field == "complex" else n * (n + 1) // 2


@lru_cache(maxsize=None)
def _triu(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, 1)


def hvec(m: np.ndarray, field: str = "complex") -> np.ndarray:
    """Coordinates of (a stack of) Hermitian matrices along the last two axes."""
    m = np.asarray(m)
    n = m.shape[-1]
    iu, ju = _triu(n)
    diag = np.real(np.diagonal(m, axis1=-2, axis2=-1))
    off = m[..., iu, ju]
    parts = [diag, SQRT2 * np.real(off)]
    if field == "complex":
        parts.append(SQRT2 * np.imag(off))
    return np.concatenate(parts, axis=-1)


def hmat(v: np.ndarray, n: int, field: str = "complex") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    iu, ju = _triu(n)
    k = len(iu)
    dtype = complex if field == "complex" else float
    out = np.zeros(v.shape[:-1] + (n, n), dtype=dtype)
    idx = np.arange(n)
    out[..., idx, idx] = v[..., :n]
    off = v[..., n : n + k] / SQRT2
    if field == "complex":
        off = off + 1j * v[..., n + k : n + 2 * k] / SQRT2
    out[..., iu, ju] = off
    out[..., ju, iu] = np.conj(off)
    return out


@lru_cache(maxsize=64)
def basis(n: int, field: str = "complex") -> np.ndarray:
    """Stack of orthonormal basis matrices with ``hvec(basis[p]) = e_p``."""
    return hmat(np.eye(coord_size(n, field)), n, field)


def map_matrix(
    fn: Callable[[np.ndarray], np.ndarray],
    n_in: int,
    field_in: str = "complex",
    field_out: str = "complex",
) -> np.ndarray:
    """Real matrix of a Hermiticity-preserving linear map in coordinates."""
    out = fn(basis(n_in, field_in))
    return hvec(out, field_out).T
