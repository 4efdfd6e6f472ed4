"""Seeded numerical checks of the identities and orderings the bounds obey.

Each suite draws its random instances from one ``numpy`` generator seeded by
the caller and returns a :class:`SuiteResult` listing every comparison with
its deviation and tolerance. A solver failure inside a suite is recorded as
a failed check rather than raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import asymptotics as asy
from . import bounds, channel, linops
from .sdpcore.certificate import check_certificate
from .sdpcore import solve


@dataclass
class Check:
    label: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)


@dataclass
class SuiteResult:
    name: str
    checks: list[Check] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors and all(c.passed for c in self.checks)

    @property
    def worst(self) -> float:
        """Largest deviation relative to its tolerance (<= 1 means pass)."""
        def ratio(c: Check) -> float:
            if c.tolerance > 0:
                return c.deviation / c.tolerance
            return 0.0 if c.deviation <= 0 else math.inf

        return max((ratio(c) for c in self.checks), default=0.0)

    @property
    def worst_deviation(self) -> float:
        return max((c.deviation for c in self.checks), default=0.0)

    def add(self, label: str, deviation: float, tolerance: float) -> None:
        self.checks.append(Check(label, float(deviation), tolerance))

    def guard(self, label: str, fn: Callable[[], None]) -> None:
        try:
            fn()
        except (bounds.SolverFailure, np.linalg.LinAlgError) as exc:
            self.errors.append(f"{label}: {exc}")


def sample_channel(rng: np.random.Generator, max_dim: int = 3) -> channel.ChoiMatrix:
    da, db = (int(v) for v in rng.integers(2, max_dim + 1, size=2))
    return channel.random_channel(da, db, rng)


# -- coding-bound identities -------------------------------------------------


def activation(seed: int = 0, samples: int = 20, eps_grid=(0.1, 0.25), tol: float = 1e-5) -> SuiteResult:
    res = SuiteResult("activation")
    rng = np.random.default_rng(seed)
    for i in range(samples):
        c = sample_channel(rng)
        for eps in eps_grid:
            def run(c=c, eps=eps, i=i):
                act = bounds.activated_ns(c, eps).value_bits
                mw = bounds.mw_bound(c, eps).value_bits
                res.add(f"#{i} {c.dims} eps={eps}", abs(act - mw), tol)
            res.guard(f"#{i} eps={eps}", run)
    return res


def additivity(seed: int = 0, samples: int = 10, ms=(2, 3), eps: float = 0.1, tol: float = 1e-5) -> SuiteResult:
    res = SuiteResult("additivity")
    rng = np.random.default_rng(seed)
    for i in range(samples):
        c = sample_channel(rng, max_dim=2 if max(ms) > 2 else 3)
        def run(c=c, i=i):
            base = bounds.mw_bound(c, eps).value_bits
            for m in ms:
                ext = bounds.mw_bound(channel.tensor(c, channel.noiseless_channel(m)), eps).value_bits
                res.add(f"#{i} {c.dims} m={m}", abs(ext - base - math.log2(m)), tol)
        res.guard(f"#{i}", run)
    return res


def duality(seed: int = 0, samples: int = 25, eps: float = 0.1, tol: float = 1e-6, cert_tol: float = 1e-8) -> SuiteResult:
    res = SuiteResult("duality")
    rng = np.random.default_rng(seed)
    for i in range(samples):
        c = sample_channel(rng)
        def run(c=c, i=i):
            prob = bounds.mw_problem(c, eps)
            sol = solve(prob)
            if not sol.optimal:
                raise bounds.SolverFailure("mw", sol)
            dual = bounds.mw_bound(c, eps, "dual")
            value = -math.log2(sol.primal_value)
            res.add(f"#{i} {c.dims} primal-vs-dual", abs(value - dual.value_bits) / (1 + abs(value)), tol)
            cert = check_certificate(prob, sol)
            res.add(f"#{i} certificate", cert.max_violation, cert_tol)
        res.guard(f"#{i}", run)
    return res


def ordering(seed: int = 0, samples: int = 25, eps: float = 0.1, tol: float = 1e-6) -> SuiteResult:
    res = SuiteResult("ordering")
    rng = np.random.default_rng(seed)
    for i in range(samples):
        c = sample_channel(rng)
        def run(c=c, i=i):
            mw = bounds.mw_bound(c, eps).value_bits
            meta = bounds.metaconverse_vbeta(c, eps).value_bits
            ns = bounds.ns_oneshot(c, eps).value_bits
            res.add(f"#{i} {c.dims} meta<=mw", max(0.0, meta - mw), tol)
            res.add(f"#{i} {c.dims} ns<=mw", max(0.0, ns - mw), tol)
        res.guard(f"#{i}", run)
    return res


# -- structure of V_beta -------------------------------------------------------


def _vbeta_member(rng: np.random.Generator, dims: tuple[int, int]) -> np.ndarray:
    """A random CP map's Choi matrix rescaled to ``beta <= 1``."""
    min_rank = -(-dims[0] // dims[1])
    c = channel.random_channel(dims[0], dims[1], rng, rank=int(rng.integers(min_rank, dims[0] * dims[1] + 1)))
    scale = rng.uniform(0.6, 1.0)
    return scale * c.op / bounds.beta_of(c.op, dims)


def vbeta_containment(seed: int = 0, samples: int = 20, states: int = 50, tol: float = 1e-7) -> SuiteResult:
    """``beta(J_M) <= 1`` implies ``M(rho) <= S`` for the optimal ``S``."""
    res = SuiteResult("vbeta-containment")
    rng = np.random.default_rng(seed)
    for i in range(samples):
        dims = tuple(int(v) for v in rng.integers(2, 4, size=2))
        def run(i=i, dims=dims):
            k = _vbeta_member(rng, dims)
            beta = bounds.beta_solve(k, dims)
            m = channel.ChoiMatrix(dims[0], dims[1], k)
            worst = 0.0
            for _ in range(states):
                rho = channel.random_state(dims[0], rng, rank=int(rng.integers(1, dims[0] + 1)))
                worst = max(worst, -linops.min_eig(beta.S - channel.apply(m, rho)))
            res.add(f"#{i} {dims} beta={beta.value:.6f}", max(0.0, worst), tol)
            res.add(f"#{i} tr S <= 1", max(0.0, np.trace(beta.S).real - 1.0), tol)
        res.guard(f"#{i}", run)
    return res


def vbeta_convexity(seed: int = 0, samples: int = 20, tol: float = 1e-7) -> SuiteResult:
    res = SuiteResult("vbeta-convexity")
    rng = np.random.default_rng(seed)
    for i in range(samples):
        dims = tuple(int(v) for v in rng.integers(2, 4, size=2))
        def run(i=i, dims=dims):
            k1, k2 = _vbeta_member(rng, dims), _vbeta_member(rng, dims)
            for t in (0.25, 0.5, 0.75):
                beta = bounds.beta_of(t * k1 + (1 - t) * k2, dims)
                res.add(f"#{i} {dims} t={t}", max(0.0, beta - 1.0), tol)
        res.guard(f"#{i}", run)
    return res


def vbeta_unitary(seed: int = 0, samples: int = 20, tol: float = 1e-6) -> SuiteResult:
    res = SuiteResult("vbeta-unitary")
    rng = np.random.default_rng(seed)
    for i in range(samples):
        dims = tuple(int(v) for v in rng.integers(2, 4, size=2))
        def run(i=i, dims=dims):
            k = channel.random_channel(dims[0], dims[1], rng).op
            u = np.kron(channel.random_unitary(dims[0], rng), channel.random_unitary(dims[1], rng))
            rotated = u @ k @ u.conj().T
            res.add(f"#{i} {dims}", abs(bounds.beta_of(rotated, dims) - bounds.beta_of(k, dims)), tol)
        res.guard(f"#{i}", run)
    return res


# -- erasure channel ----------------------------------------------------------


def _tensor_states(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def erasure_exactness(tol: float = 1e-6) -> SuiteResult:
    """Shell-counting oracle against the interior-point ``dh_epsilon``."""
    res = SuiteResult("erasure")
    for d in (2, 3):
        for p in (0.1, 0.5, 0.9):
            rho, sigma = asy.erasure_state_pair(d, p)
            for eps in (0.05, 0.3, 0.7):
                def run(d=d, p=p, eps=eps, rho=rho, sigma=sigma):
                    exact = asy.erasure_exact_dh(asy.ErasureModel(d, p, 1, eps))
                    sdp = bounds.dh_epsilon(rho, sigma, eps).value_bits
                    res.add(f"n=1 d={d} p={p} eps={eps}", abs(exact - sdp), tol)
                res.guard(f"n=1 d={d} p={p} eps={eps}", run)
    for p in (0.1, 0.5, 0.9):
        rho, sigma = asy.erasure_state_pair(2, p)
        rho2, sigma2 = _tensor_states(rho, rho), _tensor_states(sigma, sigma)
        for eps in (0.05, 0.3, 0.7):
            def run(p=p, eps=eps, rho2=rho2, sigma2=sigma2):
                exact = asy.erasure_exact_dh(asy.ErasureModel(2, p, 2, eps))
                sdp = bounds.dh_epsilon(rho2, sigma2, eps).value_bits
                res.add(f"n=2 d=2 p={p} eps={eps}", abs(exact - sdp), tol)
            res.guard(f"n=2 p={p} eps={eps}", run)
    return res


def second_order(ns=(100, 500, 1000), d: int = 2, p: float = 0.5, eps: float = 0.05) -> SuiteResult:
    res = SuiteResult("second-order")
    for n in ns:
        out = asy.erasure_second_order(asy.ErasureModel(d, p, n, eps))
        res.add(f"n={n} residual", abs(out.residual_bits), 3 * math.log2(n))
    return res


def moderate(n: int = 10_000, d: int = 2, p: float = 0.5, exponent: float = 1 / 3, tol: float = 0.25) -> SuiteResult:
    res = SuiteResult("moderate")
    a_n = n ** (-exponent)
    out = asy.erasure_moderate(d, p, n, a_n)
    res.add(f"n={n} low gap/a_n", abs(out.exact_rate_low - out.rate_low) / a_n, tol)
    res.add(f"n={n} high gap/a_n", abs(out.exact_rate_high - out.rate_high) / a_n, tol)
    return res


def upsilon_consistency(tol: float = 1e-10, order_tol: float = 1e-5) -> SuiteResult:
    res = SuiteResult("upsilon")
    for d in (2, 3):
        for p in (0.0, 0.25, 0.5, 1.0):
            ups = asy.upsilon_erasure(d, p)
            rho, sigma = asy.erasure_state_pair(d, p)
            res.add(f"d={d} p={p} Upsilon=D", abs(ups - asy.rel_entropy(rho, sigma)), tol)
            def run(d=d, p=p, ups=ups):
                cb = bounds.c_beta(channel.erasure_channel(d, p)).value_bits
                res.add(f"d={d} p={p} Upsilon<=C_beta", max(0.0, ups - cb), order_tol)
            res.guard(f"d={d} p={p}", run)
            m = asy.erasure_bounding_map(d, p)
            def member(d=d, m=m):
                res.add(f"d={d} p={p} M in V_beta", max(0.0, bounds.beta_of(m.op, m.dims) - 1.0), bounds.VBETA_TOL)
            res.guard(f"d={d} p={p} membership", member)
    return res


def cbeta_additivity(seed: int = 0, tol: float = 1e-5) -> SuiteResult:
    res = SuiteResult("cbeta")
    rng = np.random.default_rng(seed)
    cases = [("erasure(2,0.5)", channel.erasure_channel(2, 0.5)), ("random 2x2", channel.random_channel(2, 2, rng))]
    for label, c in cases:
        def run(label=label, c=c):
            single = bounds.c_beta(c).value_bits
            double = bounds.c_beta(channel.tensor(c, c)).value_bits
            res.add(label, abs(double - 2 * single), tol)
        res.guard(label, run)
    return res


def strong_converse(r: float = 0.8, alpha: float = 2.0, ns=(10, 100, 1000), d: int = 2, p: float = 0.5) -> SuiteResult:
    res = SuiteResult("strong-converse")
    per_copy = asy.upsilon_covariant_upper(channel.erasure_channel(d, p), asy.erasure_bounding_map(d, p), alpha)
    res.add(f"per-copy Upsilon_{alpha} bound below r", max(0.0, per_copy - r), 0.0)
    values = [asy.strong_converse_eps_lower(r, n, alpha, n * per_copy) for n in ns]
    for (n0, v0), (n1, v1) in zip(zip(ns, values), zip(ns[1:], values[1:])):
        res.add(f"monotone n={n0}->{n1}", max(0.0, v0 - v1), 0.0)
    res.add(f"eps bound at n={ns[-1]} exceeds 0.99", max(0.0, 0.99 - values[-1]), 0.0)
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "activation": activation,
    "additivity": additivity,
    "duality": duality,
    "ordering": ordering,
    "vbeta": None,  # expands to the three V_beta suites
    "erasure": lambda **kw: erasure_exactness(),
    "second-order": lambda **kw: second_order(),
    "moderate": lambda **kw: moderate(),
    "upsilon": lambda **kw: upsilon_consistency(),
    "cbeta": lambda **kw: cbeta_additivity(seed=kw.get("seed", 0)),
    "strong-converse": lambda **kw: strong_converse(),
}


def run_suite(name: str, seed: int = 0, samples: int | None = None, ms=None) -> list[SuiteResult]:
    """Run one named suite with common options; ``samples`` overrides defaults."""
    kw: dict = {"seed": seed}
    if samples is not None:
        kw["samples"] = samples
    if name == "vbeta":
        return [vbeta_containment(**kw), vbeta_convexity(**kw), vbeta_unitary(**kw)]
    if name == "additivity" and ms is not None:
        kw["ms"] = tuple(ms)
    if name not in SUITES:
        raise KeyError(name)
    return [SUITES[name](**kw)]
