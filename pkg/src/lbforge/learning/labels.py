"""Grid-search labels for the first neighborhood size."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..features import BipartiteState, extract_bipartite
from ..lb.constraint import floor_k, hamming_delta, k_max
from ..lb.records import LbConfig, LbStatus
from ..lb.search import _root_lp, clamp_k, lb_iterate
from ..milp.model import Assignment, MilpInstance, ModelError
from ..milp.simplex import LpStatus

log = logging.getLogger(__name__)

TIE_TOL = 1e-12


@dataclass(frozen=True)
class CostMetricParams:
    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


def cost_metric(t_elapsed: float, t_limit: float, obj: float, obj_bounds: tuple, params: CostMetricParams = CostMetricParams()) -> float:
    """``alpha * t_scaled + (1 - alpha) * o_scaled``, both terms in [0, 1]."""
    if not t_limit > 0:
        raise ValueError("t_limit must be positive")
    best, worst = obj_bounds
    if best > worst:
        raise ValueError("obj_bounds must be (best, worst) with best <= worst")
    t_scaled = min(max(t_elapsed, 0.0) / t_limit, 1.0)
    span = worst - best
    o_scaled = 0.0 if span <= 0 else min(max((obj - best) / span, 0.0), 1.0)
    return params.alpha * t_scaled + (1.0 - params.alpha) * o_scaled


@dataclass(frozen=True)
class GridPoint:
    phi: float
    k: float
    status: str
    elapsed: float
    obj: float
    cost: float

    @property
    def solved(self) -> bool:
        return self.status in (LbStatus.OPTIMAL.value, LbStatus.INFEASIBLE.value)


@dataclass(eq=False)
class LabeledSample:
    state: BipartiteState
    k_prime: float
    k0_star: float
    phi0_star: float
    cost_curve: list = field(default_factory=list)  # GridPoint per grid value
    instance: str = ""

    def label_record(self) -> dict:
        return {
            "instance": self.instance,
            "k_prime": self.k_prime,
            "k0_star": self.k0_star,
            "phi0_star": self.phi0_star,
            "cost_curve": [[p.phi, p.k, p.status, p.elapsed, p.obj, p.cost] for p in self.cost_curve],
        }


def phi_grid(resolution: float = 0.01) -> np.ndarray:
    steps = int(round(1.0 / resolution))
    return np.arange(1, steps) / steps


def select_label(points: list) -> GridPoint:
    """Cost argmin; ties go to the largest solved point, else the smallest phi."""
    best = min(p.cost for p in points)
    tied = [p for p in points if p.cost <= best + TIE_TOL]
    solved = [p for p in tied if p.solved]
    if solved:
        return max(solved, key=lambda p: p.phi)
    return min(tied, key=lambda p: p.phi)


def generate_label(
    inst: MilpInstance,
    incumbent: Assignment,
    t_limit: Optional[float] = None,
    resolution: float = 0.01,
    cfg: LbConfig = LbConfig(),
    params: CostMetricParams = CostMetricParams(),
    compact: bool = False,
) -> Optional[LabeledSample]:
    """Evaluate one LB iteration per grid ratio and label the cheapest.

    Returns ``None`` (sample skipped) when the LP relaxation has no optimum
    or the LP optimum lies within distance 1 of the incumbent.  Grid values
    that floor to the same neighborhood size share one evaluation.
    """
    if not incumbent.feasible:
        raise ModelError("incumbent must be feasible")
    t_limit = cfg.node_time_limit_default if t_limit is None else t_limit
    lp = _root_lp(inst)
    if lp is None or lp.status != LpStatus.OPTIMAL:
        log.info("%s: LP relaxation not optimal, sample skipped", inst.name)
        return None
    form = cfg.constraint_form
    k_prime = hamming_delta(lp.x, incumbent, form, inst=inst)
    if k_prime < 1:
        log.info("%s: k' = %.3g, sample skipped", inst.name, k_prime)
        return None
    clock = cfg.make_clock()
    kmax = k_max(inst, incumbent, form)
    cache: dict = {}
    raw = []
    for phi in phi_grid(resolution):
        k = clamp_k(phi * k_prime, kmax)
        key = floor_k(k)
        if key not in cache:
            out = lb_iterate(inst, incumbent, k, t_limit, form=form, clock=clock, parent_basis=lp.basis)
            obj = out.new_incumbent.objective if out.new_incumbent is not None else incumbent.objective
            cache[key] = (out.status.value, out.elapsed, obj)
        raw.append((float(phi), phi * k_prime) + cache[key])
    objs = [r[4] for r in raw]
    bounds = (min(objs), max(objs))
    points = [GridPoint(phi, k, st, el, obj, cost_metric(el, t_limit, obj, bounds, params)) for phi, k, st, el, obj in raw]
    chosen = select_label(points)
    return LabeledSample(
        state=extract_bipartite(inst, incumbent, compact=compact),
        k_prime=k_prime,
        k0_star=chosen.k,
        phi0_star=chosen.phi,
        cost_curve=points,
        instance=inst.name,
    )
