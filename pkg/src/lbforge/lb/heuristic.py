"""Local branching called from inside branch-and-bound as a primal heuristic."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Union

from ..milp.bnb import HookContext, solve_milp
from ..milp.model import Assignment, MilpInstance, SolverLimits, SolveResult
from .records import LbConfig
from .variants import Runner, make_runner

log = logging.getLogger(__name__)

ROOT_ONLY = "root_only"
EVERY_F_NODES = "every_f_nodes"
DEFAULT_F = 100


@dataclass(frozen=True, eq=False)
class HeuristicSolveResult(SolveResult):
    lb_calls: int = 0
    lb_improvements: int = 0
    lb_failures: int = 0


def run_as_primal_heuristic(
    inst: MilpInstance,
    mode: str = ROOT_ONLY,
    f: int = DEFAULT_F,
    lb_variant: Union[str, Runner] = "lb-base",
    cfg: LbConfig = LbConfig(),
    limits: SolverLimits = SolverLimits(),
    models: Optional[dict] = None,
) -> HeuristicSolveResult:
    """Solve ``inst`` with an LB run hooked into the node loop.

    ``root_only`` calls LB once, at the first node that has an incumbent.
    ``every_f_nodes`` calls it at every ``f``-th processed node when the
    solver found a new incumbent since the previous call.  LB sub-solves do
    not count towards ``limits.node_limit``.
    """
    if mode not in (ROOT_ONLY, EVERY_F_NODES):
        raise ValueError(f"unknown mode {mode!r}")
    if f < 1:
        raise ValueError("f must be at least 1")
    runner = make_runner(lb_variant, models or {}) if isinstance(lb_variant, str) else lb_variant
    stats = {"calls": 0, "improved": 0, "failed": 0}
    last_seen = {"obj": None}

    def hook(ctx: HookContext) -> Optional[Assignment]:
        inc = ctx.incumbent
        if inc is None:
            return None
        if mode == ROOT_ONLY:
            if stats["calls"]:
                return None
        else:
            if ctx.nodes % f != 0 or inc.objective == last_seen["obj"]:
                return None
        stats["calls"] += 1
        try:
            rec = runner(ctx.instance, inc, cfg)
        except Exception as exc:  # a failed LB call must not abort the solve
            stats["failed"] += 1
            log.warning("LB call at node %d failed: %s", ctx.nodes, exc)
            last_seen["obj"] = inc.objective
            return None
        best = rec.best
        last_seen["obj"] = best.objective
        if best.objective < inc.objective:
            stats["improved"] += 1
            return best
        return None

    res = solve_milp(inst, limits, heuristic_hook=hook)
    return HeuristicSolveResult(
        status=res.status,
        best=res.best,
        elapsed=res.elapsed,
        nodes=res.nodes,
        bound=res.bound,
        lp_iterations=res.lp_iterations,
        lp_errors=res.lp_errors,
        heuristic_calls=res.heuristic_calls,
        incumbent_trace=res.incumbent_trace,
        lb_calls=stats["calls"],
        lb_improvements=stats["improved"],
        lb_failures=stats["failed"],
    )
