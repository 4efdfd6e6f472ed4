"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays. Bipartite operators on ``A (x) B`` use
the composite index ``i_A * d_B + i_B``; every partial operation below is
derived from that single convention. Most helpers accept stacks of matrices
with arbitrary leading dimensions, which the SDP builders rely on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-9
SUPPORT_TOL = 1e-12


class DimensionError(ValueError):
    """Operator shape does not match the declared subsystem dimensions."""


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _check_square(m: np.ndarray) -> None:
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise DimensionError(f"expected square matrix, got shape {m.shape}")


def _check_finite(m: np.ndarray) -> None:
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(m + m^dagger)/2`` after checking ``m`` is Hermitian up to ``tol``.

    Drift at the level of floating-point noise is absorbed; anything larger is
    treated as a caller mistake and raises ``ValueError``.
    """
    m = np.asarray(m, dtype=complex)
    _check_square(m)
    _check_finite(m)
    asym = np.max(np.abs(m - dagger(m))) if m.size else 0.0
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if asym > tol * scale:
        raise ValueError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
    return (m + dagger(m)) / 2


def kron(a, b) -> np.ndarray:
    """Kronecker product, ``(i_a, i_b) -> i_a * dim_b + i_b``."""
    return np.kron(np.asarray(a), np.asarray(b))


def _split(m: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    da, db = int(dims[0]), int(dims[1])
    _check_square(m)
    if m.shape[-1] != da * db:
        raise DimensionError(
            f"operator of size {m.shape[-1]} does not match dims {da}x{db}"
        )
    return m.reshape(m.shape[:-2] + (da, db, da, db))


def partial_trace(m, dims: tuple[int, int], keep: str = "A") -> np.ndarray:
    """Trace out one factor of a bipartite operator; ``keep`` is ``"A"`` or ``"B"``."""
    t = _split(np.asarray(m), dims)
    if keep == "A":
        return np.einsum("...ajbj->...ab", t)
    if keep == "B":
        return np.einsum("...iaib->...ab", t)
    raise ValueError(f"keep must be 'A' or 'B', not {keep!r}")


def partial_transpose(m, dims: tuple[int, int], on: str = "B") -> np.ndarray:
    """Transpose the tagged factor in the computational basis."""
    m = np.asarray(m)
    t = _split(m, dims)
    if on == "B":
        t = np.swapaxes(t, -3, -1)
    elif on == "A":
        t = np.swapaxes(t, -4, -2)
    else:
        raise ValueError(f"on must be 'A' or 'B', not {on!r}")
    return t.reshape(m.shape)


def eigh(m) -> Spectrum:
    m = hermitian(m)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # LAPACK did not converge
        raise np.linalg.LinAlgError(f"eigendecomposition failed: {exc}") from exc
    return Spectrum(w, v)


def spectral_fn(
    m, f: Callable[[np.ndarray], np.ndarray], support_only: bool = False
) -> np.ndarray:
    """Apply ``f`` to the eigenvalues of a Hermitian matrix.

    With ``support_only`` set, eigenvalues of magnitude at most 1e-12 are sent
    to zero instead of being passed to ``f`` (so ``log`` acts on the support).
    Raises ``ValueError`` when ``f`` produces a non-finite value.
    """
    spec = eigh(m)
    w = spec.eigenvalues
    out = np.zeros_like(w)
    mask = np.abs(w) > SUPPORT_TOL if support_only else np.ones(w.shape, bool)
    with np.errstate(all="ignore"):
        vals = np.asarray(f(w[mask]), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("function undefined on an eigenvalue of the input")
    out[mask] = vals
    v = spec.eigenvectors
    return (v * out) @ v.conj().T


def real_embed(m) -> np.ndarray:
    """``[[Re m, -Im m], [Im m, Re m]]``; PSD-ness is preserved both ways."""
    m = np.asarray(m, dtype=complex)
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]])


def min_eig(m) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh((m + dagger(m)) / 2)[0])


def psd_margin(m) -> float:
    """Smallest eigenvalue relative to the scale-aware PSD threshold (>= 0 passes)."""
    w = np.linalg.eigvalsh(hermitian(m))
    if w.size == 0:
        return 0.0
    return float(w[0] + PSD_TOL * (1.0 + np.max(np.abs(w))))


def is_psd(m) -> bool:
    return psd_margin(m) >= 0.0


def sqrtm_psd(m) -> np.ndarray:
    return spectral_fn(m, lambda w: np.sqrt(np.clip(w, 0.0, None)))


def max_entangled(d: int, normalized: bool = False) -> np.ndarray:
    """``sum_ij |ii><jj|``, divided by ``d`` when ``normalized``."""
    v = np.eye(d, dtype=complex).reshape(d * d)
    out = np.outer(v, v)
    return out / d if normalized else out


def swap(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[i * d + j, j * d + i] = 1.0
    return s
