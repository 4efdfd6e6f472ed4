"""The ten acceptance criteria, each at its stated tolerance.

Every criterion records a one-line PASS/FAIL verdict; ``conftest.py``
prints them at the end of the pytest run, and running this file directly
prints them as they finish.
"""

from __future__ import annotations

import math
import sys
import time

import numpy as np
import pytest

from qconverse import asymptotics as asy
from qconverse import bounds, channel, verify

VERDICTS: dict[int, str] = {}


def _record(number: int, title: str, passed: bool, detail: str) -> None:
    VERDICTS[number] = f"{'PASS' if passed else 'FAIL'} criterion {number:>2} ({title}): {detail}"
    if __name__ == "__main__":
        print(VERDICTS[number], flush=True)
    assert passed, VERDICTS[number]


def _suite_verdict(number: int, title: str, results, expected_checks: int | None = None, elapsed=None, limit=None) -> None:
    checks = sum(len(r.checks) for r in results)
    errors = [e for r in results for e in r.errors]
    worst = max((r.worst_deviation for r in results), default=0.0)
    passed = all(r.passed for r in results) and not errors
    detail = f"{checks} checks, worst deviation {worst:.2e}"
    if expected_checks is not None:
        passed = passed and checks == expected_checks
        detail += f" (expected {expected_checks} checks)"
    if errors:
        detail += f", {len(errors)} solver error(s): {errors[0]}"
    if limit is not None:
        passed = passed and elapsed < limit
        detail += f", {elapsed:.1f} s (limit {limit:.0f} s)"
    _record(number, title, passed, detail)


def test_criterion_01_activation():
    t0 = time.perf_counter()
    res = verify.activation(seed=0, samples=20, eps_grid=(0.1, 0.25), tol=1e-5)
    _suite_verdict(1, "activation identity", [res], 40, time.perf_counter() - t0, 300.0)


def test_criterion_02_additivity():
    res = verify.additivity(seed=0, samples=10, ms=(2, 3), tol=1e-5)
    _suite_verdict(2, "additivity with noiseless channels", [res], 20)


def test_criterion_03_strong_duality():
    res = verify.duality(seed=0, samples=25, tol=1e-6, cert_tol=1e-8)
    _suite_verdict(3, "strong duality and certificates", [res], 50)


def test_criterion_04_ordering():
    res = verify.ordering(seed=0, samples=25, tol=1e-6)
    _suite_verdict(4, "ordering meta, ns <= mw", [res], 50)


def test_criterion_05_vbeta_structure():
    results = [
        verify.vbeta_containment(seed=0, samples=20, states=50, tol=1e-7),
        verify.vbeta_convexity(seed=0, samples=20, tol=1e-7),
        verify.vbeta_unitary(seed=0, samples=20, tol=1e-6),
    ]
    _suite_verdict(5, "V_beta containment/convexity/unitary invariance", results, 40 + 60 + 20)


def test_criterion_06_erasure_exactness():
    res = verify.erasure_exactness(tol=1e-6)
    _suite_verdict(6, "erasure oracle vs SDP at n=1 and n=2", [res], 18 + 9)


def test_criterion_07_second_order():
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for n in (100, 500, 1000):
        exact = asy.erasure_exact_dh(asy.ErasureModel(2, 0.5, n, 0.05))
        expansion = n * 0.5 + math.sqrt(0.25 * n) * asy.inv_normal_cdf(0.05)
        ratio = abs(exact - expansion) / (3 * math.log2(n))
        worst = max(worst, ratio)
        ok = ok and ratio <= 1.0
    elapsed = time.perf_counter() - t0
    _record(
        7,
        "second-order expansion",
        ok and elapsed < 10.0,
        f"worst |exact - expansion| / (3 log2 n) = {worst:.3f}, {elapsed:.2f} s (limit 10 s)",
    )


def test_criterion_08_upsilon_consistency():
    worst_eq = worst_order = 0.0
    for d in (2, 3):
        for p in (0.0, 0.25, 0.5, 1.0):
            ups = asy.upsilon_erasure(d, p)
            rho, sigma = asy.erasure_state_pair(d, p)
            worst_eq = max(worst_eq, abs(ups - asy.rel_entropy(rho, sigma)))
            cb = bounds.c_beta(channel.erasure_channel(d, p)).value_bits
            worst_order = max(worst_order, ups - cb)
    _record(
        8,
        "Upsilon = D(E(Phi)||M(Phi)) and Upsilon <= C_beta",
        worst_eq <= 1e-10 and worst_order <= 1e-5,
        f"max |Upsilon - D| = {worst_eq:.2e} (tol 1e-10), max (Upsilon - C_beta) = {worst_order:.2e} (tol 1e-5)",
    )


def test_criterion_09_cbeta_additivity():
    rng = np.random.default_rng(0)
    cases = [channel.erasure_channel(2, 0.5), channel.random_channel(2, 2, rng)]
    devs = []
    for c in cases:
        single = bounds.c_beta(c).value_bits
        double = bounds.c_beta(channel.tensor(c, c)).value_bits
        devs.append(abs(double - 2 * single))
    _record(
        9,
        "C_beta additivity",
        max(devs) <= 1e-5,
        "deviations " + ", ".join(f"{d:.2e}" for d in devs) + " (tol 1e-5)",
    )


def test_criterion_10_strong_converse():
    per_copy = asy.upsilon_covariant_upper(channel.erasure_channel(2, 0.5), asy.erasure_bounding_map(2, 0.5), 2.0)
    ns = (10, 100, 1000)
    values = [asy.strong_converse_eps_lower(0.8, n, 2.0, n * per_copy) for n in ns]
    monotone = all(a <= b for a, b in zip(values, values[1:]))
    _record(
        10,
        "strong converse evaluator",
        per_copy < 0.8 and monotone and values[-1] > 0.99,
        f"per-copy bound {per_copy:.4f} bits, eps lower bounds " + ", ".join(f"{v:.6f}" for v in values),
    )


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_criterion_")):
        try:
            fn()
        except AssertionError:
            failures += 1
    sys.exit(1 if failures else 0)
