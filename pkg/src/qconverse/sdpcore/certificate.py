"""Independent re-verification of a solved program.

Residuals are recomputed from the builder's original terms applied in
matrix form to the reported blocks and multipliers; the compiled
constraint matrix and the solver's own residual bookkeeping are not used.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coords import basis
from .problem import SdpProblem, Var, block_keys
from .solver import OPTIMAL, SdpSolution

DEFAULT_TOL = 1e-8


@dataclass
class CertificateReport:
    certified: bool
    reason: str
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")
    gap: float = float("nan")
    primal_cone: float = float("nan")  # most negative eigenvalue / entry, relative
    dual_cone: float = float("nan")
    per_constraint: dict[str, float] = field(default_factory=dict)

    @property
    def max_violation(self) -> float:
        return max(self.primal_residual, self.dual_residual, self.gap, self.primal_cone, self.dual_cone)


def _apply(var: Var, coef, value, scalar_con: bool):
    """Contribution of one term to its constraint, in matrix or scalar form."""
    if var.is_matrix:
        if scalar_con:
            return _objective_term(var, coef, value)
        if callable(coef):
            return coef(value)
        return float(coef) * value
    if np.ndim(coef) == 0:
        return float(coef) * value
    return np.asarray(coef) * value


def _adjoint(var: Var, coef, mult, scalar_con: bool):
    """Adjoint of the term applied to a constraint multiplier."""
    if var.is_matrix:
        if scalar_con:
            return mult * np.asarray(coef) if np.ndim(coef) else mult * float(coef) * np.eye(var.n)
        if callable(coef):
            stack = basis(var.n, var.field)
            images = coef(stack)
            weights = np.einsum("kab,ba->k", images, mult).real
            return np.einsum("k,kab->ab", weights, stack)
        return float(coef) * mult
    if scalar_con:
        return float(coef) * mult
    return float(np.trace(np.asarray(coef) @ mult).real)


def _objective_term(var: Var, coef, value) -> float:
    if var.is_matrix:
        cmat = np.asarray(coef) if np.ndim(coef) else float(coef) * np.eye(var.n)
        return float(np.trace(cmat @ value).real)
    return float(coef) * float(value)


def _neg_part(value, kind: str) -> float:
    if kind == "psd":
        w = np.linalg.eigvalsh((value + value.conj().T) / 2)
        scale = 1.0 + float(np.max(np.abs(w)))
        return max(0.0, -float(w[0]) / scale)
    if kind == "nonneg":
        return max(0.0, -float(value) / (1.0 + abs(float(value))))
    return 0.0


def check_certificate(problem: SdpProblem, sol: SdpSolution, tol: float = DEFAULT_TOL) -> CertificateReport:
    """Recompute feasibility, cone membership and gap for an optimal solve."""
    if sol.status != OPTIMAL:
        return CertificateReport(False, f"declined: status is {sol.status}")
    keys = block_keys(problem.variables)
    try:
        values = {var.uid: sol.primal_blocks[keys[var.uid]] for var in problem.variables}
    except KeyError as exc:
        return CertificateReport(False, f"declined: missing primal block {exc}")

    # primal feasibility
    num = 0.0
    rhs_norm = 0.0
    per: dict[str, float] = {}
    multipliers = []
    for con, terms, rhs in problem.terms:
        total = -np.asarray(rhs, dtype=complex) if con.n is not None else -float(rhs)
        for var, coef in terms:
            total = total + _apply(var, coef, values[var.uid], con.n is None)
        r2 = float(np.sum(np.abs(total) ** 2))
        per[con.name] = max(per.get(con.name, 0.0), r2**0.5)
        num += r2
        rhs_norm += float(np.sum(np.abs(np.asarray(rhs)) ** 2))
        multipliers.append(sol.multiplier(con))
    primal_res = num**0.5 / (1.0 + rhs_norm**0.5)

    # dual: z = sign * (C - adjoint(Y)), must be in the dual cone, zero on free vars
    sign = 1.0 if problem.sense == "minimize" else -1.0
    zuser: dict[int, object] = {}
    for var in problem.variables:
        zuser[var.uid] = np.zeros((var.n, var.n), dtype=complex) if var.is_matrix else 0.0
    cnorm = 0.0
    for var, coef in problem.objective_terms:
        if var.is_matrix:
            cmat = np.asarray(coef) if np.ndim(coef) else float(coef) * np.eye(var.n)
            zuser[var.uid] = zuser[var.uid] + cmat
            cnorm += float(np.sum(np.abs(cmat) ** 2))
        else:
            zuser[var.uid] = zuser[var.uid] + float(coef)
            cnorm += float(coef) ** 2
    for (con, terms, _), mult in zip(problem.terms, multipliers):
        for var, coef in terms:
            zuser[var.uid] = zuser[var.uid] - _adjoint(var, coef, mult, con.n is None)
    dual_num = 0.0
    primal_cone = dual_cone = 0.0
    for var in problem.variables:
        z = sign * zuser[var.uid]
        if var.kind in ("free", "hermitian"):
            dual_num += float(np.sum(np.abs(z) ** 2))
        else:
            dual_cone = max(dual_cone, _neg_part(z, var.kind))
            primal_cone = max(primal_cone, _neg_part(values[var.uid], var.kind))
    dual_res = dual_num**0.5 / (1.0 + cnorm**0.5)

    # objective values recomputed from blocks and multipliers
    pval = problem._objective_offset
    for var, coef in problem.objective_terms:
        pval += _objective_term(var, coef, values[var.uid])
    dval = problem._objective_offset
    for (con, _, rhs), mult in zip(problem.terms, multipliers):
        if con.n is None:
            dval += float(rhs) * mult
        else:
            dval += float(np.trace(np.asarray(rhs) @ mult).real)
    gap = abs(pval - dval) / (1.0 + abs(pval))

    worst = max(primal_res, dual_res, gap, primal_cone, dual_cone)
    ok = worst <= tol
    return CertificateReport(
        ok,
        "certified" if ok else "violations",
        primal_res,
        dual_res,
        gap,
        primal_cone,
        dual_cone,
        per,
    )
