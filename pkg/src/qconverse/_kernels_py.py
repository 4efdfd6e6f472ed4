"""Reference (numpy / pure Python) versions of the hot kernels.

``_kernels.pyx`` implements the same functions; ``kernels`` picks one at
import time. Both must agree to rounding, which the test-suite checks.
"""

from __future__ import annotations

import math

import numpy as np

from .sdpcore.coords import SQRT2, _triu, hvec


def scaling_matrix(w: np.ndarray, field: str = "complex") -> np.ndarray:
    """Coordinate matrix of ``X -> W X W`` (symmetric, size ``coord_size(n)``)."""
    w = np.asarray(w)
    n = w.shape[0]
    if field == "real":
        w = w.real
    # o[i, j] = W E_ij W = outer(W[:, i], W[j, :])
    o = np.einsum("ai,jb->ijab", w, w)
    iu, ju = _triu(n)
    idx = np.arange(n)
    upper, lower = o[iu, ju], o[ju, iu]
    cols = [o[idx, idx], (upper + lower) / SQRT2]
    if field == "complex":
        cols.append(1j * (upper - lower) / SQRT2)
    p = hvec(np.concatenate(cols, axis=0), field)
    return (p + p.T) / 2


def shell_test(log_p: np.ndarray, log_q: np.ndarray, log_target: float) -> tuple[int, float, float]:
    """Optimal randomized test over shells sorted by decreasing ``p/q``.

    Shells are accepted in order until their ``p`` mass reaches
    ``exp(log_target)``; the boundary shell is accepted with probability
    ``gamma``. Returns ``(boundary, gamma, log_beta)`` where ``beta`` is the
    accepted ``q`` mass. Sums are Kahan-compensated after shifting by the
    largest log term, so masses far below the double range still count.
    """
    log_p = np.asarray(log_p, dtype=float)
    log_q = np.asarray(log_q, dtype=float)
    n = len(log_p)
    shift = float(np.max(log_p))
    target = math.exp(log_target - shift)
    acc = comp = 0.0
    boundary, gamma = n - 1, 1.0
    for k in range(n):
        term = math.exp(log_p[k] - shift)
        if acc + term >= target:
            boundary = k
            gamma = min(1.0, max(0.0, (target - acc) / term)) if term > 0 else 0.0
            break
        y = term - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
    qshift = float(np.max(log_q[: boundary + 1]))
    acc = comp = 0.0
    for k in range(boundary):
        y = math.exp(log_q[k] - qshift) - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
    acc += gamma * math.exp(log_q[boundary] - qshift)
    log_beta = qshift + math.log(acc) if acc > 0 else -math.inf
    return boundary, gamma, log_beta
