"""Local branching loops: fixed-rule baseline, regression-initialized and policy-driven."""

from __future__ import annotations

import logging
import math
from typing import Callable, Optional

import numpy as np

from .. import features
from ..milp.bnb import solve_milp
from ..milp.model import Assignment, MilpInstance, ModelError, SolveStatus
from ..milp.simplex import Basis, BoundedSimplex, LpNumericalError, LpStatus
from .clock import NodeClock
from .constraint import LEFT, RIGHT, SYMMETRIC, floor_k, hamming_delta, k_max, lb_rows
from .records import LbConfig, LbIteration, LbIterationOutcome, LbRunRecord, LbStatus

log = logging.getLogger(__name__)

INCREASE, KEEP, DECREASE, RESET = range(4)
ACTION_NAMES = ("increase", "keep", "decrease", "reset")
_STATUS_MAP = {
    SolveStatus.OPTIMAL: LbStatus.OPTIMAL,
    SolveStatus.INFEASIBLE: LbStatus.INFEASIBLE,
    SolveStatus.FEASIBLE_LIMIT_HIT: LbStatus.IMPROVED,
    SolveStatus.NO_SOLUTION_LIMIT_HIT: LbStatus.NOT_IMPROVED,
}


def lb_iterate(
    inst: MilpInstance,
    incumbent: Assignment,
    k: float,
    t_limit: float,
    *,
    form: str = SYMMETRIC,
    clock=None,
    excluded: tuple = (),
    parent_basis: Optional[Basis] = None,
) -> LbIterationOutcome:
    """Search the ball ``Delta(x, incumbent) <= floor(k)`` for a strictly better solution.

    ``excluded`` holds ``(center, k)`` pairs whose balls are cut away with
    ``Delta >= floor(k) + 1``.  ``parent_basis`` is an LP basis of ``inst``
    used to warm-start the sub-MILP root.
    """
    if not incumbent.feasible:
        raise ModelError("incumbent must be feasible")
    if k < 1 - 1e-9:
        raise ModelError(f"neighborhood size must be at least 1, got {k}")
    if not t_limit > 0:
        raise ModelError("t_limit must be positive")
    clock = clock or NodeClock()
    specs = [(incumbent, k, LEFT)] + [(c, kk, RIGHT) for c, kk in excluded]
    rows, senses, rhs, names = lb_rows(inst, specs, form)
    sub = inst.with_rows(rows, senses, rhs, names)
    root = parent_basis.with_rows(len(specs)) if parent_basis is not None else None
    try:
        res = solve_milp(sub, clock.limits(t_limit, cutoff=incumbent.objective), root_basis=root)
    except (LpNumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        log.warning("sub-MILP failed: %s", exc)
        return LbIterationOutcome(LbStatus.NOT_IMPROVED, None, t_limit, 0.0, error=True)

    status = _STATUS_MAP[res.status]
    new = None
    if res.best is not None:
        new = Assignment.of(inst, res.best.values)
        if not new.feasible or not new.objective < incumbent.objective:
            log.warning("sub-MILP returned a solution that does not improve the incumbent")
            new = None
            status = LbStatus.NOT_IMPROVED if status == LbStatus.IMPROVED else LbStatus.INFEASIBLE
    events = tuple((clock.at_node(res, n), obj) for n, obj in res.incumbent_trace) if new is not None else ()
    return LbIterationOutcome(
        status=status,
        new_incumbent=new,
        elapsed=clock.charge(res),
        obj_improvement=max(0.0, incumbent.objective - new.objective) if new is not None else 0.0,
        nodes=res.nodes,
        error=res.lp_errors > 0,
        events=events,
    )


# -- k and t updates ----------------------------------------------------------


def apply_k_action(k: float, action: int, cfg: LbConfig) -> float:
    if action == INCREASE:
        return k + cfg.k_step * k
    if action == DECREASE:
        return k - cfg.k_step * k
    if action == KEEP:
        return k
    if action == RESET:
        return cfg.k0_default
    raise ValueError(f"unknown action {action}")


def apply_t_action(t: float, action: int, cfg: LbConfig) -> float:
    if action == INCREASE:
        return t * cfg.t_step
    if action == DECREASE:
        return t / cfg.t_step
    if action == KEEP:
        return t
    if action == RESET:
        return cfg.node_time_limit_default
    raise ValueError(f"unknown action {action}")


def baseline_k_update(k: float, status: LbStatus) -> float:
    """Fixed rule: widen after a proven-empty ball, shrink after a fruitless limit hit."""
    if status == LbStatus.INFEASIBLE:
        return k + math.ceil(k / 2)
    if status == LbStatus.NOT_IMPROVED:
        return k - math.ceil(k / 2)
    return k


def clamp_k(k: float, kmax: int) -> float:
    return float(min(max(k, 1.0), kmax))


# -- the shared loop --------------------------------------------------------------

# a rule maps (current value, RlState, previous outcome) to (new value, action index or None)
Rule = Callable


def _baseline_rule(k, state, prev):
    return baseline_k_update(k, prev.status), None


def _policy_rule(policy, apply, cfg, rng):
    def rule(value, state, prev):
        a = int(policy.act(state.as_array(), rng))
        return apply(value, a, cfg), a

    return rule


def _root_lp(inst: MilpInstance):
    try:
        return BoundedSimplex.for_instance(inst).solve(inst.lb, inst.ub)
    except LpNumericalError as exc:
        log.warning("root LP failed: %s", exc)
        return None


def run_lb(
    inst: MilpInstance,
    initial: Assignment,
    cfg: LbConfig,
    *,
    k0: Optional[float] = None,
    k_rule: Rule = _baseline_rule,
    t_rule: Optional[Rule] = None,
    algorithm: str = "lb",
    lp=None,
    notes: tuple = (),
) -> LbRunRecord:
    """Iterate local branching until the global time budget is spent.

    After every improvement the ball is recentered on the new incumbent and
    the old ball is cut away; a ball proven to hold nothing better is cut
    away as well.  The run stops early once a ball covering the whole
    binary space comes back empty.
    """
    if not initial.feasible:
        raise ModelError("initial solution must be feasible")
    clock = cfg.make_clock()
    form = cfg.constraint_form
    if lp is None:
        lp = _root_lp(inst)
    basis = lp.basis if lp is not None and lp.status == LpStatus.OPTIMAL else None
    k = cfg.k0_default if k0 is None else float(k0)
    rec = LbRunRecord(
        t_max=cfg.global_time_limit,
        initial_obj=initial.objective,
        algorithm=algorithm,
        instance=inst.name,
        k0=k,
        best=initial,
        notes=list(notes),
    )
    incumbent = initial
    t = cfg.node_time_limit_default
    excluded: list = []
    misses = 0
    elapsed = 0.0
    prev = None
    while True:
        remaining = cfg.global_time_limit - elapsed
        if remaining <= 1e-9:
            break
        kmax = k_max(inst, incumbent, form)
        state = k_action = t_action = None
        if prev is not None:
            st = features.extract_rl_state(prev, rec, misses >= 2)
            state = st.as_tuple()
            k, k_action = k_rule(k, st, prev)
            if t_rule is not None:
                t, t_action = t_rule(t, st, prev)
                t = min(max(t, cfg.t_min), cfg.global_time_limit)
        k = clamp_k(k, kmax)
        t_run = min(max(t, cfg.t_min), remaining)
        out = lb_iterate(inst, incumbent, k, t_run, form=form, clock=clock, excluded=tuple(excluded), parent_basis=basis)
        elapsed += out.elapsed
        if out.status.improving:
            excluded.append((incumbent, floor_k(k)))
            incumbent = out.new_incumbent
            misses = 0
        else:
            misses += 1
            if out.status == LbStatus.INFEASIBLE:
                excluded.append((incumbent, floor_k(k)))
        rec.iterations.append(LbIteration(k, t_run, out, incumbent.objective, elapsed, state, k_action, t_action))
        prev = out
        if out.status == LbStatus.INFEASIBLE and floor_k(k) >= kmax:
            rec.notes.append("search space exhausted")
            break
    rec.best = incumbent
    return rec


def run_lb_baseline(inst: MilpInstance, initial: Assignment, cfg: LbConfig = LbConfig(), algorithm: str = "lb-base") -> LbRunRecord:
    return run_lb(inst, initial, cfg, algorithm=algorithm)


def regression_k0(inst: MilpInstance, initial: Assignment, cfg: LbConfig, reg_model, lp=None):
    """First neighborhood size from the LP distance scaled by the predicted ratio.

    Returns ``(k0, lp, note)``; falls back to ``k0_default`` when the LP has no
    optimum or the LP optimum is within distance 1 of the incumbent.
    """
    if lp is None:
        lp = _root_lp(inst)
    if lp is None or lp.status != LpStatus.OPTIMAL:
        status = "error" if lp is None else lp.status.value
        log.info("LP relaxation %s, using k0_default", status)
        return cfg.k0_default, lp, f"lp {status}: k0 fallback"
    k_prime = hamming_delta(lp.x, initial, cfg.constraint_form, inst=inst)
    if k_prime < 1:
        log.info("LP distance %.3g below 1, using k0_default", k_prime)
        return cfg.k0_default, lp, "k' < 1: k0 fallback"
    state = features.extract_bipartite(inst, initial, compact=getattr(reg_model, "compact", False))
    phi = float(reg_model.predict(state))
    return phi * k_prime, lp, f"k'={k_prime:.6g} phi={phi:.6g}"


def run_lb_with_regression(inst, initial, cfg: LbConfig, reg_model, algorithm: str = "lb-sr") -> LbRunRecord:
    k0, lp, note = regression_k0(inst, initial, cfg, reg_model)
    return run_lb(inst, initial, cfg, k0=k0, algorithm=algorithm, lp=lp, notes=(note,))


def _k0_from_source(inst, initial, cfg, k0_source):
    if k0_source is None or k0_source == "default":
        return cfg.k0_default, None, ()
    k0, lp, note = regression_k0(inst, initial, cfg, k0_source)
    return k0, lp, (note,)


def run_lb_rl(inst, initial, cfg: LbConfig, policy_k, k0_source=None, rng=None, algorithm: str = "lb-rl") -> LbRunRecord:
    """Policy-driven k; ``k0_source`` is ``None``/"default" or a regression model.

    With ``rng`` actions are sampled, otherwise the greedy action is taken.
    """
    k0, lp, notes = _k0_from_source(inst, initial, cfg, k0_source)
    rule = _policy_rule(policy_k, apply_k_action, cfg, rng)
    return run_lb(inst, initial, cfg, k0=k0, k_rule=rule, algorithm=algorithm, lp=lp, notes=notes)


def run_lb_rl_hybrid(
    inst, initial, cfg: LbConfig, policy_k, policy_t, k0_source=None, rng=None, rng_k=None, algorithm: str = "lb-rl-t"
) -> LbRunRecord:
    """Policy-driven k and per-iteration time limit.

    ``rng`` drives the time policy and ``rng_k`` the k policy; either may be
    ``None`` for greedy actions.
    """
    k0, lp, notes = _k0_from_source(inst, initial, cfg, k0_source)
    k_rule = _policy_rule(policy_k, apply_k_action, cfg, rng_k)
    t_rule = _policy_rule(policy_t, apply_t_action, cfg, rng)
    return run_lb(inst, initial, cfg, k0=k0, k_rule=k_rule, t_rule=t_rule, algorithm=algorithm, lp=lp, notes=notes)
