"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
versions in ``_kernels_py`` take over. Setting ``QCONVERSE_PURE_PYTHON=1``
forces the fallback (used by the benchmark and the parity tests).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

_compiled = None
if os.environ.get("QCONVERSE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def scaling_matrix(w: np.ndarray, field: str = "complex") -> np.ndarray:
    if _compiled is None:
        return _kernels_py.scaling_matrix(w, field)
    if field == "complex":
        return _compiled.scaling_matrix_complex(np.ascontiguousarray(w, dtype=complex))
    return _compiled.scaling_matrix_real(np.ascontiguousarray(np.real(w), dtype=float))


def shell_test(log_p, log_q, log_target: float) -> tuple[int, float, float]:
    if _compiled is None:
        return _kernels_py.shell_test(log_p, log_q, log_target)
    return _compiled.shell_test(
        np.ascontiguousarray(log_p, dtype=float),
        np.ascontiguousarray(log_q, dtype=float),
        float(log_target),
    )
