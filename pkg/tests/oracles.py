"""Independent reference computations used to freeze expected values.

Nothing here imports the package's solver or shell kernel: the erasure
hypothesis test is done in exact rational arithmetic and the classical one
with a linear program.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

import mpmath
import numpy as np
from scipy.optimize import linprog


def erasure_dh_exact(n: int, d: int, p: Fraction, eps: Fraction) -> float:
    """-log2 beta for E_p(Phi)^n vs M(Phi)^n, by exact shell accounting."""
    target = 1 - eps
    acc_p = Fraction(0)
    beta = Fraction(0)
    for k in range(n, -1, -1):  # k intact copies, likelihood ratio d**k
        pk = comb(n, k) * (1 - p) ** k * p ** (n - k)
        if pk == 0:
            continue
        qk = pk / Fraction(d) ** k
        if acc_p + pk >= target:
            beta += qk * (target - acc_p) / pk
            break
        acc_p += pk
        beta += qk
    with mpmath.workdps(40):
        return float(-mpmath.log(mpmath.mpf(beta.numerator) / beta.denominator, 2))


def classical_dh(p0, p1, eps: float) -> float:
    """min sum q*p1 s.t. sum q*p0 >= 1-eps, 0 <= q <= 1, as -log2."""
    p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
    res = linprog(p1, A_ub=[-p0], b_ub=[-(1 - eps)], bounds=[(0, 1)] * len(p0), method="highs")
    assert res.status == 0
    return float(-np.log2(res.fun))
