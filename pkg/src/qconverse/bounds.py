"""Converse bounds on one-shot classical communication, as semidefinite programs.

Every builder returns an :class:`SdpProblem`; the ``*_bound`` style helpers
solve it and convert to bits. All logarithms are base two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linops
from .channel import ChoiMatrix, noiseless_channel, tensor
from .sdpcore import SdpProblem, SdpSolution, SolverConfig, solve

BETA_ZERO = 1e-12  # optimal type-II error at or below this is reported as +inf bits
DH_CONFIG = SolverConfig(gap_tol=1e-10, feas_tol=1e-9)
BETA_CONFIG = SolverConfig(gap_tol=1e-10, feas_tol=1e-9)
VBETA_TOL = 1e-9


class DomainError(ValueError):
    """An argument lies outside the domain where a bound is defined."""


class SolverFailure(RuntimeError):
    def __init__(self, name: str, solution: SdpSolution):
        super().__init__(f"{name}: solver returned {solution.status} ({solution.message})")
        self.solution = solution


@dataclass
class BoundResult:
    name: str
    value_bits: float
    primal_value: float
    dual_value: float
    gap: float
    solution: SdpSolution | None = None
    extras: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return self.solution.iterations if self.solution is not None else 0

    @property
    def residuals(self) -> dict[str, float]:
        if self.solution is None:
            return {"primal": 0.0, "dual": 0.0}
        return dict(self.solution.residuals)


def check_eps(eps: float, allow_zero: bool = False) -> float:
    eps = float(eps)
    low_ok = eps >= 0 if allow_zero else eps > 0
    if not (low_ok and eps < 1) or math.isnan(eps):
        bounds = "[0, 1)" if allow_zero else "(0, 1)"
        raise DomainError(f"eps must lie in {bounds}, got {eps}")
    return eps


def _neg_log2(value: float) -> float:
    if value <= BETA_ZERO:
        return math.inf
    return -math.log2(value)


def _solved(name: str, problem: SdpProblem, cfg: SolverConfig | None) -> SdpSolution:
    sol = solve(problem, cfg)
    if not sol.optimal:
        raise SolverFailure(name, sol)
    return sol


def _result(name: str, sol: SdpSolution, value: float, **extras) -> BoundResult:
    return BoundResult(name, _neg_log2(value), sol.primal_value, sol.dual_value, sol.gap, sol, extras)


def _kron_right(d: int):
    eye = np.eye(d)
    return lambda m: np.kron(m, eye)


def _kron_left(d: int):
    eye = np.eye(d)
    return lambda m: np.kron(eye, m)


def _ptrace(dims, keep):
    return lambda m: linops.partial_trace(m, dims, keep)


def _ptranspose(dims, scale=1.0):
    return lambda m: scale * linops.partial_transpose(m, dims, "B")


def _state(m, name: str) -> np.ndarray:
    m = linops.hermitian(np.asarray(m, dtype=complex), tol=1e-9)
    if not linops.is_psd(m):
        raise DomainError(f"{name} is not positive semidefinite")
    return m


# -- hypothesis testing ---------------------------------------------------


def dh_problem(rho0, rho1, eps: float, ppt_dims: tuple[int, int] | None = None) -> tuple[SdpProblem, object]:
    n = rho0.shape[0]
    p = SdpProblem("dh")
    q = p.psd(n, "Q")
    p.add_matrix([(q, 1.0)], "<<", 1.0, n=n, name="Q<=1")
    p.add([(q, rho0)], ">=", 1.0 - eps, name="type-I")
    if ppt_dims is not None:
        p.add_matrix([(q, _ptranspose(ppt_dims))], ">>", 0.0, n=n, name="Q^T_B>=0")
        p.add_matrix([(q, _ptranspose(ppt_dims))], "<<", 1.0, n=n, name="Q^T_B<=1")
    p.minimize([(q, rho1)])
    return p, q


def _kernel_mass(rho0, rho1) -> float:
    """``tr(P_ker(rho1) rho0)``: type-I success reachable at zero type-II cost."""
    w, v = np.linalg.eigh(rho1)
    ker = v[:, w <= linops.SUPPORT_TOL]
    return float(np.real(np.trace(ker.conj().T @ rho0 @ ker)))


def dh_epsilon(rho0, rho1, eps: float, cfg: SolverConfig | None = None) -> BoundResult:
    """Hypothesis-testing divergence ``-log2 min{tr Q rho1 : tr Q rho0 >= 1-eps, 0 <= Q <= 1}``."""
    return _dh("dh_epsilon", rho0, rho1, eps, None, cfg)


def dh_epsilon_ppt(rho0, rho1, eps: float, dims: tuple[int, int], cfg: SolverConfig | None = None) -> BoundResult:
    """As :func:`dh_epsilon`, with the test also PPT across ``dims``."""
    return _dh("dh_epsilon_ppt", rho0, rho1, eps, dims, cfg)


def _dh(name, rho0, rho1, eps, dims, cfg) -> BoundResult:
    eps = check_eps(eps, allow_zero=True)
    rho0, rho1 = _state(rho0, "rho0"), _state(rho1, "rho1")
    if rho0.shape != rho1.shape:
        raise linops.DimensionError(f"state shapes differ: {rho0.shape} vs {rho1.shape}")
    if dims is not None and dims[0] * dims[1] != rho0.shape[0]:
        raise linops.DimensionError(f"dims {dims} do not match size {rho0.shape[0]}")
    if dims is None and _kernel_mass(rho0, rho1) >= 1.0 - eps:
        return BoundResult(name, math.inf, 0.0, 0.0, 0.0, None, {"reason": "disjoint supports"})
    p, q = dh_problem(rho0, rho1, eps, dims)
    sol = _solved(name, p, cfg or DH_CONFIG)
    return _result(name, sol, sol.primal_value, test=sol.value(q))


# -- entanglement-assisted / no-signalling converses ------------------------


def _channel_dims(c: ChoiMatrix) -> tuple[int, int]:
    return c.dim_in, c.dim_out


def mw_problem(c: ChoiMatrix, eps: float) -> SdpProblem:
    da, db = _channel_dims(c)
    n = da * db
    p = SdpProblem("mw")
    f = p.psd(n, "F")
    rho = p.psd(da, "rho")
    lam = p.free("lambda")
    p.add_matrix([(rho, _kron_right(db)), (f, -1.0)], ">>", 0.0, n=n, name="F<=rho x 1")
    p.add([(rho, np.eye(da))], "==", 1.0, name="tr rho")
    p.add_matrix([(lam, np.eye(db)), (f, lambda m: -linops.partial_trace(m, (da, db), "B"))], ">>", 0.0, n=db, name="tr_A F<=lambda")
    p.add([(f, c.op)], ">=", 1.0 - eps, name="success")
    p.minimize([(lam, 1.0)])
    return p


def mw_dual_problem(c: ChoiMatrix, eps: float) -> SdpProblem:
    da, db = _channel_dims(c)
    n = da * db
    p = SdpProblem("mw-dual")
    x = p.psd(n, "X")
    y = p.psd(db, "Y")
    s = p.nonneg("s")
    t = p.free("t")
    p.add_matrix([(x, 1.0), (y, _kron_left(da)), (s, -c.op)], ">>", 0.0, n=n, name="X+1xY>=sJ")
    p.add_matrix([(t, np.eye(da)), (x, lambda m: -linops.partial_trace(m, (da, db), "A"))], ">>", 0.0, n=da, name="t1>=tr_B X")
    p.add([(y, np.eye(db))], "<=", 1.0, name="tr Y")
    p.maximize([(s, 1.0 - eps), (t, -1.0)])
    return p


def mw_bound(c: ChoiMatrix, eps: float, form: str = "primal", cfg: SolverConfig | None = None) -> BoundResult:
    """Entanglement-assisted one-shot converse ``R(N, eps)`` in bits."""
    eps = check_eps(eps)
    if form == "primal":
        sol = _solved("mw_bound", mw_problem(c, eps), cfg)
    elif form == "dual":
        sol = _solved("mw_bound", mw_dual_problem(c, eps), cfg)
    else:
        raise ValueError(f"form must be 'primal' or 'dual', not {form!r}")
    return _result("mw", sol, sol.primal_value, form=form)


def ns_problem(c: ChoiMatrix, eps: float) -> SdpProblem:
    da, db = _channel_dims(c)
    n = da * db
    p = SdpProblem("ns")
    f = p.psd(n, "F")
    rho = p.psd(da, "rho")
    eta = p.free("eta")
    p.add_matrix([(rho, _kron_right(db)), (f, -1.0)], ">>", 0.0, n=n, name="F<=rho x 1")
    p.add([(rho, np.eye(da))], "==", 1.0, name="tr rho")
    p.add_matrix([(eta, np.eye(db)), (f, lambda m: -linops.partial_trace(m, (da, db), "B"))], "==", 0.0, n=db, name="tr_A F=eta")
    p.add([(f, c.op)], ">=", 1.0 - eps, name="success")
    p.minimize([(eta, 1.0)])
    return p


def ns_oneshot(c: ChoiMatrix, eps: float, cfg: SolverConfig | None = None) -> BoundResult:
    """No-signalling assisted one-shot capacity in bits."""
    eps = check_eps(eps)
    sol = _solved("ns_oneshot", ns_problem(c, eps), cfg)
    return _result("ns", sol, sol.primal_value)


def activated_ns(c: ChoiMatrix, eps: float, cfg: SolverConfig | None = None) -> BoundResult:
    """NS capacity of ``N x I_2`` minus the borrowed bit."""
    inner = ns_oneshot(tensor(c, noiseless_channel(2)), eps, cfg)
    return BoundResult(
        "activated_ns",
        inner.value_bits - 1.0,
        inner.primal_value,
        inner.dual_value,
        inner.gap,
        inner.solution,
    )


# -- beta functional ----------------------------------------------------------


def beta_problem(k, dims: tuple[int, int]) -> tuple[SdpProblem, object, object]:
    """Dual statement of ``min tr S`` over ``|K^T_B| <= R``, ``|R^T_B| <= 1 x S``.

    Returns the problem plus the two equality handles whose multipliers are
    the optimal ``R`` and ``S``.
    """
    da, db = dims
    n = da * db
    kt = linops.partial_transpose(k, dims, "B")
    p = SdpProblem("beta")
    p1, p2 = p.psd(n, "P1"), p.psd(n, "P2")
    q1, q2 = p.psd(n, "Q1"), p.psd(n, "Q2")
    r_con = p.add_matrix(
        [(p1, 1.0), (p2, 1.0), (q1, _ptranspose(dims, -1.0)), (q2, _ptranspose(dims, 1.0))],
        "==",
        0.0,
        n=n,
        name="R",
    )
    s_con = p.add_matrix([(q1, _ptrace(dims, "B")), (q2, _ptrace(dims, "B"))], "==", np.eye(db), name="S")
    p.maximize([(p1, kt), (p2, -kt)])
    return p, r_con, s_con


@dataclass
class BetaResult:
    value: float
    R: np.ndarray
    S: np.ndarray
    solution: SdpSolution


def beta_solve(k, dims: tuple[int, int], cfg: SolverConfig | None = None) -> BetaResult:
    k = linops.hermitian(np.asarray(k, dtype=complex), tol=1e-9)
    if k.shape[0] != dims[0] * dims[1]:
        raise linops.DimensionError(f"dims {dims} do not match size {k.shape[0]}")
    p, r_con, s_con = beta_problem(k, dims)
    sol = _solved("beta", p, cfg or BETA_CONFIG)
    value = max(0.0, 0.5 * (sol.primal_value + sol.dual_value))
    return BetaResult(value, sol.multiplier(r_con), sol.multiplier(s_con), sol)


def beta_of(k, dims: tuple[int, int], cfg: SolverConfig | None = None) -> float:
    return beta_solve(k, dims, cfg).value


def c_beta(c: ChoiMatrix, cfg: SolverConfig | None = None) -> BoundResult:
    """Strong-converse capacity bound ``log2 beta(J_N)``."""
    res = beta_solve(c.op, c.dims, cfg)
    sol = res.solution
    return BoundResult("c_beta", math.log2(res.value), sol.primal_value, sol.dual_value, sol.gap, sol, {"S": res.S})


def vbeta_contains(k, dims: tuple[int, int], cfg: SolverConfig | None = None) -> bool:
    return beta_of(k, dims, cfg) <= 1.0 + VBETA_TOL


# -- meta-converse over V_beta -------------------------------------------------


def metaconverse_problem(c: ChoiMatrix, eps: float, cp_map: bool = True) -> SdpProblem:
    """Joint program over the bounding map ``M`` and the hypothesis test.

    With ``cp_map`` the map is also constrained to be completely positive.
    """
    da, db = _channel_dims(c)
    n = da * db
    dims = (da, db)
    p = SdpProblem("metaconverse")
    jm = p.psd(n, "J_M") if cp_map else p.free_hermitian(n, "J_M")
    z = p.psd(n, "Z")
    x = p.nonneg("x")
    y = p.free("y")
    r = p.free_hermitian(n, "R")
    s = p.free_hermitian(db, "S")
    p.add_matrix([(jm, 1.0), (x, -c.op), (z, 1.0)], ">>", 0.0, n=n, name="J_M-xJ+Z>=0")
    p.add_matrix([(y, np.eye(da)), (z, _ptrace(dims, "A"))], "<<", 0.0, n=da, name="y1+tr_B Z<=0")
    p.add([(s, np.eye(db))], "<=", 1.0, name="tr S")
    p.add_matrix([(r, 1.0), (jm, _ptranspose(dims, -1.0))], ">>", 0.0, n=n, name="R>=J_M^T")
    p.add_matrix([(r, 1.0), (jm, _ptranspose(dims, 1.0))], ">>", 0.0, n=n, name="R>=-J_M^T")
    p.add_matrix([(s, _kron_left(da)), (r, _ptranspose(dims, -1.0))], ">>", 0.0, n=n, name="1xS>=R^T")
    p.add_matrix([(s, _kron_left(da)), (r, _ptranspose(dims, 1.0))], ">>", 0.0, n=n, name="1xS>=-R^T")
    p.maximize([(x, 1.0 - eps), (y, 1.0)])
    return p


def metaconverse_vbeta(c: ChoiMatrix, eps: float, cp_map: bool = True, cfg: SolverConfig | None = None) -> BoundResult:
    """Meta-converse with the bounding map ranging over ``V_beta``, in bits."""
    eps = check_eps(eps)
    sol = _solved("metaconverse_vbeta", metaconverse_problem(c, eps, cp_map), cfg)
    return _result("meta", sol, sol.primal_value)


BOUNDS = {
    "mw": lambda c, eps: mw_bound(c, eps, "primal"),
    "mw_dual": lambda c, eps: mw_bound(c, eps, "dual"),
    "ns": ns_oneshot,
    "activated_ns": activated_ns,
    "meta": metaconverse_vbeta,
    "c_beta": lambda c, eps: c_beta(c),
}
