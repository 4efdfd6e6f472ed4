"""Entropic quantities and the erasure channel's finite-blocklength analysis.

The n-copy hypothesis test between ``E_p(Phi)`` and ``M(Phi)`` (``M`` the
erasure bounding map) reduces to a classical problem: both states are
diagonal in the basis {Phi, |i>|e>} of each copy, the likelihood ratio of
an outcome is ``d**k`` with ``k`` the number of intact copies, and the
optimal test accepts whole ``k``-shells from the top down. Everything is
done in log-space so blocklengths up to ~1e5 are cheap.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import kernels, linops
from .bounds import DomainError, check_eps
from .channel import ChoiMatrix, erasure_channel, output_with_purified_input

LN2 = math.log(2.0)
_STD_NORMAL = statistics.NormalDist()


# -- divergences ---------------------------------------------------------------


def _support_split(sigma):
    spec = linops.eigh(sigma)
    w, v = spec.eigenvalues, spec.eigenvectors
    on = w > linops.SUPPORT_TOL
    return w, v, on


def _outside_support(rho, sigma_vecs, on) -> bool:
    ker = sigma_vecs[:, ~on]
    if ker.shape[1] == 0:
        return False
    leak = float(np.real(np.trace(ker.conj().T @ rho @ ker)))
    return leak > linops.SUPPORT_TOL


def _log_difference(rho, sigma):
    """``log2 rho - log2 sigma`` on the supports, or ``None`` if supp rho is not in supp sigma."""
    rho = linops.hermitian(rho, tol=1e-9)
    sigma = linops.hermitian(sigma, tol=1e-9)
    if rho.shape != sigma.shape:
        raise linops.DimensionError(f"shapes differ: {rho.shape} vs {sigma.shape}")
    w, v, on = _support_split(sigma)
    if np.any(w < -linops.PSD_TOL * (1 + np.max(np.abs(w)))):
        raise ValueError("sigma is not positive semidefinite")
    if _outside_support(rho, v, on):
        return None, rho
    log_sigma = (v[:, on] * np.log2(w[on])) @ v[:, on].conj().T
    log_rho = linops.spectral_fn(rho, lambda x: np.log2(np.clip(x, 1e-300, None)), support_only=True)
    return log_rho - log_sigma, rho


def rel_entropy(rho, sigma) -> float:
    """Umegaki relative entropy in bits (``inf`` when supp rho is not in supp sigma)."""
    diff, rho = _log_difference(rho, sigma)
    if diff is None:
        return math.inf
    return float(np.real(np.trace(rho @ diff)))


def rel_entropy_variance(rho, sigma) -> float:
    """``tr rho (log rho - log sigma)^2 - D^2`` in bits squared."""
    diff, rho = _log_difference(rho, sigma)
    if diff is None:
        return math.inf
    d = float(np.real(np.trace(rho @ diff)))
    return float(np.real(np.trace(rho @ diff @ diff))) - d * d


def sandwiched_renyi(rho, sigma, alpha: float) -> float:
    """Sandwiched Renyi divergence of order ``alpha > 1``, in bits."""
    if not alpha > 1:
        raise DomainError(f"alpha must exceed 1, got {alpha}")
    rho = linops.hermitian(rho, tol=1e-9)
    sigma = linops.hermitian(sigma, tol=1e-9)
    w, v, on = _support_split(sigma)
    if _outside_support(rho, v, on):
        return math.inf
    power = (1.0 - alpha) / (2.0 * alpha)
    s = (v[:, on] * w[on] ** power) @ v[:, on].conj().T
    inner = s @ rho @ s
    q = linops.spectral_fn(inner, lambda x: np.clip(x, 0.0, None) ** alpha)
    total = float(np.real(np.trace(q)))
    return math.log2(total) / (alpha - 1.0)


# -- erasure channel -------------------------------------------------------------


def _check_erasure(d: int, p: float) -> None:
    if int(d) != d or d < 2:
        raise DomainError(f"d must be an integer >= 2, got {d}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")


def erasure_bounding_map(d: int, p: float) -> ChoiMatrix:
    """Subchannel ``J = (1-p)/d sum|ii><jj| + p sum|i><i| x |e><e|``."""
    _check_erasure(d, p)
    dout = d + 1
    op = np.zeros((d * dout, d * dout), dtype=complex)
    idx = np.array([i * dout + i for i in range(d)])
    op[np.ix_(idx, idx)] = (1.0 - p) / d
    for i in range(d):
        k = i * dout + d
        op[k, k] += p
    return ChoiMatrix(d, dout, op)


def _max_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex) / d


def erasure_state_pair(d: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    """``(E_p(Phi), M(Phi))`` for the normalized maximally entangled input."""
    rho = _max_mixed(d)
    return (
        output_with_purified_input(erasure_channel(d, p), rho),
        output_with_purified_input(erasure_bounding_map(d, p), rho),
    )


@dataclass(frozen=True)
class ErasureModel:
    d: int
    p: float
    n: int
    eps: float

    def __post_init__(self):
        _check_erasure(self.d, self.p)
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        check_eps(self.eps)


def _shell_logs(n: int, d: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Log masses of the k-intact shells, ordered k = n .. 0, zero shells dropped."""
    k = np.arange(n, -1, -1)
    log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    lq = math.log1p(-p) if p < 1 else 0.0
    lp = math.log(p) if p > 0 else 0.0
    keep = np.ones(n + 1, dtype=bool)
    if p == 0:
        keep = k == n
    elif p == 1:
        keep = k == 0
    k = k[keep]
    intact = k * lq if p < 1 else np.zeros(len(k))
    erased = (n - k) * lp if p > 0 else np.zeros(len(k))
    log_p = log_binom[keep] + intact + erased
    log_q = log_p - k * math.log(d)
    return log_p, log_q


def erasure_log_beta(n: int, d: int, p: float, log_accept: float) -> float:
    """Natural log of the optimal type-II error when the test must accept
    probability ``exp(log_accept)`` under the channel output."""
    log_p, log_q = _shell_logs(n, d, p)
    _, _, log_beta = kernels.shell_test(log_p, log_q, log_accept)
    return log_beta


def erasure_exact_dh(m: ErasureModel) -> float:
    """Exact n-copy hypothesis-testing divergence in bits."""
    return -erasure_log_beta(m.n, m.d, m.p, math.log1p(-m.eps)) / LN2


# -- expansions --------------------------------------------------------------------


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def inv_normal_cdf(q: float) -> float:
    """Standard normal quantile, accurate to about 1e-15."""
    q = float(q)
    if not 0.0 < q < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {q}")
    x = _STD_NORMAL.inv_cdf(q)
    # one Newton step against an erfc-based CDF
    density = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    if density > 0:
        x -= (normal_cdf(x) - q) / density
    return x


@dataclass(frozen=True)
class ExpansionResult:
    first_order_bits: float
    second_order_bits: float
    exact_bits: float | None = None

    @property
    def expansion_bits(self) -> float:
        return self.first_order_bits + self.second_order_bits

    @property
    def residual_bits(self) -> float | None:
        if self.exact_bits is None:
            return None
        return self.exact_bits - self.expansion_bits


def erasure_second_order(m: ErasureModel, exact: bool = True) -> ExpansionResult:
    log_d = math.log2(m.d)
    first = m.n * (1.0 - m.p) * log_d
    second = math.sqrt(m.n * m.p * (1.0 - m.p)) * log_d * inv_normal_cdf(m.eps) if m.eps != 0.5 else 0.0
    return ExpansionResult(first, second, erasure_exact_dh(m) if exact else None)


@dataclass(frozen=True)
class ModerateResult:
    eps_n: float
    rate_low: float
    rate_high: float
    exact_rate_low: float | None
    exact_rate_high: float | None


def erasure_moderate(d: int, p: float, n: int, a_n: float, exact: bool = True) -> ModerateResult:
    """Moderate-deviation rates at ``eps_n = exp(-n a_n^2)`` (natural exponent)."""
    _check_erasure(d, p)
    if a_n < 0 or not math.isfinite(a_n):
        raise DomainError(f"a_n must be nonnegative, got {a_n}")
    log_d = math.log2(d)
    base = (1.0 - p) * log_d
    spread = math.sqrt(2.0 * p * (1.0 - p)) * log_d * a_n
    exponent = n * a_n * a_n
    eps_n = math.exp(-exponent)
    if a_n > 0 and (eps_n == 0.0 or eps_n < np.finfo(float).tiny):
        raise DomainError(
            f"eps_n = exp(-{exponent:.4g}) underflows; use a larger a_n decay or a smaller n"
        )
    low = high = None
    if exact and a_n > 0:
        # type-I budget eps_n: accept 1 - eps_n;  budget 1 - eps_n: accept eps_n
        low = -erasure_log_beta(n, d, p, math.log1p(-eps_n)) / LN2 / n
        high = -erasure_log_beta(n, d, p, -exponent) / LN2 / n
    return ModerateResult(eps_n, base - spread, base + spread, low, high)


# -- Upsilon information and strong converse ---------------------------------------


def upsilon_erasure(d: int, p: float) -> float:
    _check_erasure(d, p)
    return (1.0 - p) * math.log2(d)


def upsilon_covariant_upper(c: ChoiMatrix, m: ChoiMatrix, alpha: float | None = None) -> float:
    """``D(N(Phi) || M(Phi))`` for a fixed bounding map ``M``.

    An upper bound on the Upsilon information of a covariant channel; with
    ``alpha`` the sandwiched Renyi divergence of that order is used instead.
    """
    if c.dim_in != m.dim_in or c.dim_out != m.dim_out:
        raise linops.DimensionError("channel and bounding map have different dimensions")
    rho = _max_mixed(c.dim_in)
    out_n = output_with_purified_input(c, rho)
    out_m = output_with_purified_input(m, rho)
    if alpha is None:
        return rel_entropy(out_n, out_m)
    return sandwiched_renyi(out_n, out_m, alpha)


_JUST_BELOW_ONE = float(np.nextafter(1.0, 0.0))


def strong_converse_eps_lower(r: float, n: int, alpha: float, upsilon_alpha_bits: float) -> float:
    """Smallest error compatible with rate ``r`` over ``n`` uses, given an
    upper bound on the n-copy sandwiched Upsilon information."""
    if not alpha > 1:
        raise DomainError(f"alpha must exceed 1, got {alpha}")
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    exponent = n * ((alpha - 1.0) / alpha) * (r - upsilon_alpha_bits / n)
    value = -math.expm1(-exponent * LN2)
    return min(max(value, 0.0), _JUST_BELOW_ONE)
