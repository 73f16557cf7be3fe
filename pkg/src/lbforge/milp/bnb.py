"""LP-based branch-and-bound for small MILPs."""

from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model import (
    CONTINUOUS,
    GAP_TOL,
    INT_TOL,
    Assignment,
    MilpInstance,
    ModelError,
    SolverLimits,
    SolveResult,
    SolveStatus,
)
from .simplex import Basis, BoundedSimplex, LpNumericalError, LpStatus

log = logging.getLogger(__name__)


@dataclass
class HookContext:
    """What a heuristic hook sees after each processed node."""

    instance: MilpInstance
    nodes: int
    depth: int
    incumbent: Optional[Assignment]
    incumbent_found_at: int  # node count when the current incumbent was installed, -1 if none


HeuristicHook = Callable[[HookContext], Optional[Assignment]]


class _Node:
    __slots__ = ("lb", "ub", "bound", "depth", "basis")

    def __init__(self, lb, ub, bound, depth, basis):
        self.lb = lb
        self.ub = ub
        self.bound = bound
        self.depth = depth
        self.basis = basis


def _has_integral_objective(inst: MilpInstance) -> bool:
    used = inst.c != 0
    if (inst.var_kind[used] == CONTINUOUS).any():
        return False
    return bool(np.all(inst.c[used] == np.round(inst.c[used])))


class _Pruner:
    """Decides which bounds/objectives can still beat the incumbent and cutoff."""

    def __init__(self, inst: MilpInstance, user_cutoff: Optional[float]):
        self.offset = inst.obj_offset
        self.integral = _has_integral_objective(inst)
        self.user = np.inf if user_cutoff is None else float(user_cutoff)
        self.limit = self.user

    def update(self, incumbent_obj: float):
        self.limit = min(self.user, incumbent_obj)

    def _tol(self):
        return GAP_TOL * max(1.0, abs(self.limit))

    def accepts(self, obj: float) -> bool:
        if not np.isfinite(self.limit):
            return True
        return obj < self.limit - self._tol()

    def prunes(self, bound: float) -> bool:
        if not np.isfinite(self.limit):
            return False
        if self.integral:
            lim = self.limit - self.offset
            return math.ceil(bound - self.offset - 1e-6) >= math.ceil(lim - 1e-9)
        return bound >= self.limit - self._tol()

    def lp_cutoff(self) -> float:
        """Raw LP value (no offset) from which the dual loop may stop."""
        if not np.isfinite(self.limit):
            return np.inf
        if self.integral:
            return math.ceil(self.limit - self.offset - 1e-9) - 1 + 1e-6 + 1e-9
        return self.limit - self._tol() - self.offset


def solve_milp(
    inst: MilpInstance,
    limits: SolverLimits = SolverLimits(),
    warm: Optional[Assignment] = None,
    heuristic_hook: Optional[HeuristicHook] = None,
    root_basis: Optional[Basis] = None,
) -> SolveResult:
    """Branch-and-bound with best-bound node selection and depth-first plunging.

    Branches on the most fractional integer variable (lowest index on ties)
    and dives into the child on the side the LP value rounds to.  Nodes whose
    LP fails numerically are dropped and counted in ``lp_errors``; their
    bound still enters the reported dual bound, so the solve cannot claim
    optimality afterwards.  ``root_basis`` warm-starts the root LP.
    """
    start = time.perf_counter()
    if warm is not None and not warm.feasible:
        raise ModelError("warm start must be feasible")

    engine = BoundedSimplex.for_instance(inst)
    int_idx = np.flatnonzero(inst.integer_mask)
    pruner = _Pruner(inst, limits.objective_cutoff)
    incumbent: Optional[Assignment] = None
    found_at = -1
    solutions = 0
    if warm is not None:
        incumbent = warm
        pruner.update(warm.objective)

    heap: list = []
    seq = 0
    nodes = 0
    lp_iters = 0
    lp_errors = 0
    failed_bounds: list[float] = []
    hook_solutions = 0
    trace: list = []
    current: Optional[_Node] = _Node(inst.lb.copy(), inst.ub.copy(), -np.inf, 0, root_basis)
    limit_hit = False

    def install(cand: Assignment) -> bool:
        nonlocal incumbent, found_at, solutions
        if not cand.feasible or not pruner.accepts(cand.objective):
            return False
        incumbent = cand
        found_at = nodes
        solutions += 1
        trace.append((nodes, cand.objective))
        pruner.update(cand.objective)
        return True

    while True:
        if current is None:
            while heap:
                _, _, node = heapq.heappop(heap)
                if not pruner.prunes(node.bound):
                    current = node
                    break
            if current is None:
                break
        if (
            (limits.node_limit is not None and nodes >= limits.node_limit)
            or (limits.solution_limit is not None and solutions >= limits.solution_limit)
            or time.perf_counter() - start >= limits.time_limit
        ):
            limit_hit = True
            break

        node, current = current, None
        nodes += 1
        try:
            lp = engine.solve(node.lb, node.ub, node.basis, cutoff=pruner.lp_cutoff())
        except LpNumericalError:
            lp = None
        if lp is not None:
            lp_iters += lp.iterations
        if lp is None or lp.status in (LpStatus.ITERATION_LIMIT, LpStatus.UNBOUNDED):
            lp_errors += 1
            failed_bounds.append(node.bound)
            log.debug("node %d: LP failure (%s)", nodes, None if lp is None else lp.status.value)
        elif lp.status == LpStatus.OPTIMAL:
            bound = lp.obj + inst.obj_offset
            if not pruner.prunes(bound):
                x = lp.x
                frac = np.abs(x[int_idx] - np.round(x[int_idx]))
                if frac.size == 0 or frac.max() <= INT_TOL:
                    install(Assignment.of(inst, x))
                else:
                    k = int(np.argmax(frac))
                    j = int(int_idx[k])
                    v = x[j]
                    down_ub = node.ub.copy()
                    down_ub[j] = math.floor(v)
                    up_lb = node.lb.copy()
                    up_lb[j] = math.ceil(v)
                    down = _Node(node.lb, down_ub, bound, node.depth + 1, lp.basis)
                    up = _Node(up_lb, node.ub, bound, node.depth + 1, lp.basis.copy())
                    dive, other = (up, down) if v - math.floor(v) >= 0.5 else (down, up)
                    seq += 1
                    heapq.heappush(heap, (other.bound, seq, other))
                    current = dive

        if heuristic_hook is not None:
            ctx = HookContext(inst, nodes, node.depth, incumbent, found_at)
            cand = heuristic_hook(ctx)
            if cand is not None and install(cand):
                hook_solutions += 1
                if current is not None and pruner.prunes(current.bound):
                    current = None

    elapsed = time.perf_counter() - start
    open_bounds = [b for b, _, _ in heap] + failed_bounds
    if current is not None:
        open_bounds.append(current.bound)
    if limit_hit:
        status = SolveStatus.FEASIBLE_LIMIT_HIT if incumbent is not None else SolveStatus.NO_SOLUTION_LIMIT_HIT
        open_bounds = [b for b in open_bounds if not pruner.prunes(b)]
        bound = min(open_bounds) if open_bounds else (incumbent.objective if incumbent else np.inf)
        if incumbent is not None:
            bound = min(bound, incumbent.objective)
    elif failed_bounds:
        status = SolveStatus.FEASIBLE_LIMIT_HIT if incumbent is not None else SolveStatus.NO_SOLUTION_LIMIT_HIT
        bound = min(failed_bounds)
        if incumbent is not None:
            bound = min(bound, incumbent.objective)
    elif incumbent is not None:
        status = SolveStatus.OPTIMAL
        bound = incumbent.objective
    else:
        status = SolveStatus.INFEASIBLE
        bound = np.inf

    return SolveResult(
        status=status,
        best=incumbent,
        elapsed=elapsed,
        nodes=nodes,
        bound=float(bound),
        lp_iterations=lp_iters,
        lp_errors=lp_errors,
        heuristic_calls=hook_solutions,
        incumbent_trace=tuple(trace),
    )
