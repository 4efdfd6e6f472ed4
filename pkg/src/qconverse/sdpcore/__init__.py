"""Small dense conic solver: builder, interior-point method, certificates, dumps."""

from .problem import Constraint, SdpProblem, StandardForm, Var
from .solver import (
    DUAL_INFEASIBLE,
    NUMERICAL_FAILURE,
    OPTIMAL,
    PRIMAL_INFEASIBLE,
    SdpSolution,
    SolverConfig,
    solve,
    solve_form,
)

__all__ = [
    "Constraint",
    "SdpProblem",
    "StandardForm",
    "Var",
    "SdpSolution",
    "SolverConfig",
    "solve",
    "solve_form",
    "OPTIMAL",
    "PRIMAL_INFEASIBLE",
    "DUAL_INFEASIBLE",
    "NUMERICAL_FAILURE",
]
