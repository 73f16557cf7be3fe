"""Sparse 0-1 MILP model, solutions and solver result types."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
import scipy.sparse as sp

FEAS_TOL = 1e-6
INT_TOL = 1e-6
GAP_TOL = 1e-9

BINARY, INTEGER, CONTINUOUS = 0, 1, 2
KIND_NAMES = {BINARY: "binary", INTEGER: "integer", CONTINUOUS: "continuous"}

# row senses use the MPS letters
LE, GE, EQ = "L", "G", "E"


class ModelError(ValueError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MilpInstance:
    """A minimization MILP ``min c'x + offset  s.t.  A x (<=,>=,=) b``.

    Maximization models are negated on construction; ``maximize`` records
    the original sense so reported objectives can be mapped back.
    Instances are immutable and safe to share between threads.
    """

    c: np.ndarray
    A: sp.csr_matrix
    senses: np.ndarray
    b: np.ndarray
    var_kind: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    obj_offset: float = 0.0
    maximize: bool = False
    name: str = "milp"
    var_names: tuple = ()
    row_names: tuple = ()

    def __post_init__(self):
        n = self.c.shape[0]
        m = self.b.shape[0]
        if self.A.shape != (m, n):
            raise ModelError(f"matrix shape {self.A.shape} does not match ({m}, {n})")
        if self.senses.shape != (m,) or not np.isin(self.senses, [LE, GE, EQ]).all():
            raise ModelError("row senses must be one of L, G, E")
        for arr, label in ((self.var_kind, "var_kind"), (self.lb, "lb"), (self.ub, "ub")):
            if arr.shape != (n,):
                raise ModelError(f"{label} must have length {n}")
        if not np.isfinite(self.A.data).all() or not np.isfinite(self.c).all():
            raise ModelError("coefficients must be finite")
        if not np.isfinite(self.b).all():
            raise ModelError("right-hand sides must be finite")
        if not self.A.has_canonical_format:
            raise ModelError("matrix has duplicate or unsorted entries")
        binary = self.var_kind == BINARY
        if (self.lb[binary] != 0).any() or (self.ub[binary] != 1).any():
            raise ModelError("binary variables must have bounds [0, 1]")
        if (self.lb > self.ub).any():
            raise ModelError("lower bound exceeds upper bound")
        if len(self.var_names) not in (0, n) or len(self.row_names) not in (0, m):
            raise ModelError("name lists must match the model dimensions")

    # -- construction -------------------------------------------------------

    @classmethod
    def build(
        cls,
        c: Sequence[float],
        A,
        senses: Sequence[str],
        b: Sequence[float],
        var_kind: Optional[Sequence[int]] = None,
        lb: Optional[Sequence[float]] = None,
        ub: Optional[Sequence[float]] = None,
        *,
        maximize: bool = False,
        obj_offset: float = 0.0,
        name: str = "milp",
        var_names: Sequence[str] = (),
        row_names: Sequence[str] = (),
    ) -> "MilpInstance":
        """Build an instance from dense or sparse data.

        ``var_kind`` defaults to all binary; bounds default to [0, 1] for
        binaries and [0, inf) otherwise.  With ``maximize=True`` the
        objective is negated so the stored model is a minimization.
        """
        c = np.asarray(c, dtype=float).ravel()
        n = c.shape[0]
        b = np.asarray(b, dtype=float).ravel()
        if sp.issparse(A):
            coo = A.tocoo()
        else:
            dense = np.asarray(A, dtype=float)
            if dense.size != b.shape[0] * n:
                raise ModelError(f"matrix has {dense.size} entries, expected {b.shape[0]} x {n}")
            dense = dense.reshape(b.shape[0], n)
            coo = sp.coo_matrix(dense)
        keys = coo.row.astype(np.int64) * max(n, 1) + coo.col
        if np.unique(keys).shape[0] != keys.shape[0]:
            raise ModelError("duplicate (row, col) entries in constraint matrix")
        mat = sp.csr_matrix((coo.data, (coo.row, coo.col)), shape=(b.shape[0], n))
        mat.eliminate_zeros()
        mat.sort_indices()
        kind = np.zeros(n, dtype=np.int8) if var_kind is None else np.asarray(var_kind, dtype=np.int8)
        lo = np.zeros(n) if lb is None else np.asarray(lb, dtype=float)
        hi = np.where(kind == BINARY, 1.0, np.inf) if ub is None else np.asarray(ub, dtype=float)
        if maximize:
            c = -c
            obj_offset = -obj_offset
        return cls(
            c=_frozen(c),
            A=mat,
            senses=_frozen(np.asarray(list(senses), dtype="<U1")),
            b=_frozen(b),
            var_kind=_frozen(kind),
            lb=_frozen(lo.astype(float)),
            ub=_frozen(hi.astype(float)),
            obj_offset=float(obj_offset),
            maximize=maximize,
            name=name,
            var_names=tuple(var_names),
            row_names=tuple(row_names),
        )

    def with_rows(self, rows: sp.spmatrix, senses: Sequence[str], rhs: Sequence[float], names=None) -> "MilpInstance":
        """Return a copy with extra constraint rows appended."""
        rows = sp.csr_matrix(rows)
        mat = sp.vstack([self.A, rows], format="csr")
        mat.sort_indices()
        row_names = self.row_names
        if row_names:
            extra = names or [f"R{self.num_cons + i}" for i in range(rows.shape[0])]
            row_names = row_names + tuple(extra)
        return MilpInstance(
            c=self.c,
            A=mat,
            senses=_frozen(np.concatenate([self.senses, np.asarray(list(senses), dtype="<U1")])),
            b=_frozen(np.concatenate([self.b, np.asarray(rhs, dtype=float)])),
            var_kind=self.var_kind,
            lb=self.lb,
            ub=self.ub,
            obj_offset=self.obj_offset,
            maximize=self.maximize,
            name=self.name,
            var_names=self.var_names,
            row_names=row_names,
        )

    def permuted(self, var_perm: np.ndarray, row_perm: np.ndarray) -> "MilpInstance":
        """Reorder columns and rows; ``var_perm[i]`` is the old index of new column i."""
        A = sp.csr_matrix(self.A[row_perm][:, var_perm])
        A.sort_indices()
        return MilpInstance(
            c=_frozen(self.c[var_perm]),
            A=A,
            senses=_frozen(self.senses[row_perm]),
            b=_frozen(self.b[row_perm]),
            var_kind=_frozen(self.var_kind[var_perm]),
            lb=_frozen(self.lb[var_perm]),
            ub=_frozen(self.ub[var_perm]),
            obj_offset=self.obj_offset,
            maximize=self.maximize,
            name=self.name,
            var_names=tuple(self.var_names[i] for i in var_perm) if self.var_names else (),
            row_names=tuple(self.row_names[i] for i in row_perm) if self.row_names else (),
        )

    # -- derived views ------------------------------------------------------

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]

    @property
    def num_cons(self) -> int:
        return self.b.shape[0]

    @property
    def binary_idx(self) -> np.ndarray:
        return np.flatnonzero(self.var_kind == BINARY)

    @property
    def integer_mask(self) -> np.ndarray:
        return self.var_kind != CONTINUOUS

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.where(self.senses == LE, -np.inf, self.b)
        hi = np.where(self.senses == GE, np.inf, self.b)
        return lo, hi

    def objective(self, x: np.ndarray) -> float:
        return float(self.c @ x) + self.obj_offset

    def reported(self, obj: float) -> float:
        """Objective in the sense the model was originally stated in."""
        return -obj if self.maximize else obj


class Feasibility(NamedTuple):
    feasible: bool
    worst_violation: float


def check_feasibility(inst: MilpInstance, x, feas_tol: float = FEAS_TOL, int_tol: float = INT_TOL) -> Feasibility:
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.num_vars,):
        raise ModelError(f"expected a vector of length {inst.num_vars}, got shape {x.shape}")
    act = inst.A @ x
    lo, hi = inst.row_bounds()
    row_viol = np.maximum(lo - act, act - hi)
    bound_viol = np.maximum(inst.lb - x, x - inst.ub)
    ints = inst.integer_mask
    int_viol = np.abs(x[ints] - np.round(x[ints]))
    worst = max(
        float(row_viol.max(initial=0.0)),
        float(bound_viol.max(initial=0.0)),
        float(int_viol.max(initial=0.0)),
        0.0,
    )
    feasible = (
        row_viol.max(initial=0.0) <= feas_tol
        and bound_viol.max(initial=0.0) <= feas_tol
        and int_viol.max(initial=0.0) <= int_tol
    )
    return Feasibility(bool(feasible), worst)


@dataclass(frozen=True, eq=False)
class Assignment:
    values: np.ndarray
    objective: float
    feasible: bool
    binary_support: frozenset = field(default_factory=frozenset)

    @classmethod
    def of(cls, inst: MilpInstance, x, *, clean: bool = True) -> "Assignment":
        """Evaluate ``x`` on ``inst``; integer entries are snapped when ``clean``."""
        x = np.array(x, dtype=float)
        if clean:
            ints = inst.integer_mask
            snapped = np.round(x[ints])
            close = np.abs(x[ints] - snapped) <= INT_TOL
            x[np.flatnonzero(ints)[close]] = snapped[close]
        feas = check_feasibility(inst, x).feasible
        return cls(
            values=_frozen(x),
            objective=inst.objective(x),
            feasible=feas,
            binary_support=support_of(inst, x),
        )

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return (
            self.objective == other.objective
            and self.feasible == other.feasible
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def support_of(inst: MilpInstance, x: np.ndarray) -> frozenset:
    idx = inst.binary_idx
    return frozenset(int(j) for j in idx[np.asarray(x)[idx] > 0.5])


class SolveStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE_LIMIT_HIT = "feasible_limit_hit"
    INFEASIBLE = "infeasible"
    NO_SOLUTION_LIMIT_HIT = "no_solution_limit_hit"


@dataclass(frozen=True)
class SolverLimits:
    """Termination limits for one branch-and-bound solve.

    ``objective_cutoff`` prunes every node whose bound is not strictly
    below the cutoff, so only strictly better solutions are accepted.
    ``solution_limit`` stops after that many incumbents were found.
    """

    time_limit: float = float("inf")
    node_limit: Optional[int] = None
    objective_cutoff: Optional[float] = None
    solution_limit: Optional[int] = None

    def __post_init__(self):
        if not self.time_limit > 0:
            raise ModelError("time_limit must be positive")
        if self.node_limit is not None and self.node_limit < 1:
            raise ModelError("node_limit must be at least 1")


@dataclass(frozen=True, eq=False)
class SolveResult:
    status: SolveStatus
    best: Optional[Assignment]
    elapsed: float
    nodes: int
    bound: float
    lp_iterations: int = 0
    lp_errors: int = 0
    heuristic_calls: int = 0
    incumbent_trace: tuple = ()  # (nodes processed, objective) per new incumbent

    @property
    def objective(self) -> float:
        return self.best.objective if self.best is not None else float("inf")

    def same_outcome(self, other: "SolveResult") -> bool:
        """Field-wise equality ignoring wall-clock time."""
        return (
            self.status == other.status
            and self.nodes == other.nodes
            and self.bound == other.bound
            and self.lp_iterations == other.lp_iterations
            and self.best == other.best
        )
