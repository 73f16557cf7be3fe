"""Exact MILP machinery: model, LP relaxation, branch-and-bound, MPS I/O."""

from .bnb import HeuristicHook, HookContext, solve_milp
from .model import (
    BINARY,
    CONTINUOUS,
    FEAS_TOL,
    GAP_TOL,
    INT_TOL,
    INTEGER,
    Assignment,
    Feasibility,
    MilpInstance,
    ModelError,
    SolverLimits,
    SolveResult,
    SolveStatus,
    check_feasibility,
)
from .mps import MpsError, format_mps, parse_mps, read_mps, write_mps
from .simplex import BoundedSimplex, LpNumericalError, LpResult, LpStatus, solve_lp_relaxation

__all__ = [
    "BINARY",
    "CONTINUOUS",
    "FEAS_TOL",
    "GAP_TOL",
    "INT_TOL",
    "INTEGER",
    "Assignment",
    "BoundedSimplex",
    "Feasibility",
    "HeuristicHook",
    "HookContext",
    "LpNumericalError",
    "LpResult",
    "LpStatus",
    "MilpInstance",
    "ModelError",
    "MpsError",
    "SolveResult",
    "SolveStatus",
    "SolverLimits",
    "check_feasibility",
    "format_mps",
    "parse_mps",
    "read_mps",
    "solve_lp_relaxation",
    "solve_milp",
    "write_mps",
]
