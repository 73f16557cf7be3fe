import json

import numpy as np
import pytest

from conftest import brute_force, enumerate_binary, random_binary_instance
from lbforge.bench import GeneratorSpec, generate, initial_solution
from lbforge.lb import (
    ASYMMETRIC,
    DECREASE,
    INCREASE,
    KEEP,
    RESET,
    SYMMETRIC,
    LbConfig,
    LbRunRecord,
    LbStatus,
    NodeClock,
    apply_k_action,
    apply_t_action,
    baseline_k_update,
    floor_k,
    hamming_delta,
    lb_iterate,
    make_clock,
    run_lb_baseline,
    run_lb_rl,
    run_lb_rl_hybrid,
    run_lb_with_regression,
)
from lbforge.lb.search import clamp_k, regression_k0
from lbforge.milp import Assignment, ModelError, SolverLimits, check_feasibility, solve_milp
from lbforge.nn import PolicyModel


def sc_case(seed=2):
    inst = generate(GeneratorSpec("sc", seed=seed))
    return inst, initial_solution(inst, "first")


def small_case(rng, n=12):
    while True:
        inst = random_binary_instance(rng, n=n, m=4)
        best, feas = brute_force(inst)
        if len(feas) > 3:
            worst = max(feas, key=inst.objective)
            if inst.objective(worst) > best:
                return inst, Assignment.of(inst, worst)


def test_action_semantics():
    cfg = LbConfig()
    assert [apply_k_action(10, a, cfg) for a in (INCREASE, KEEP, DECREASE, RESET)] == [15, 10, 5, 20]
    assert [apply_t_action(10, a, cfg) for a in (INCREASE, KEEP, DECREASE, RESET)] == [20, 10, 5, 10]
    with pytest.raises(ValueError):
        apply_k_action(10, 7, cfg)


def test_baseline_rule_and_clamp():
    assert baseline_k_update(10, LbStatus.INFEASIBLE) == 15
    assert baseline_k_update(10, LbStatus.NOT_IMPROVED) == 5
    assert baseline_k_update(10, LbStatus.IMPROVED) == 10
    assert baseline_k_update(10, LbStatus.OPTIMAL) == 10
    assert clamp_k(0.2, 30) == 1 and clamp_k(45, 30) == 30


def test_config_validation_and_round_trip():
    cfg = LbConfig(k0_default=7, constraint_form=ASYMMETRIC)
    assert LbConfig.from_dict(cfg.to_dict()) == cfg
    for bad in (dict(k_step=1.5), dict(t_step=1.0), dict(t_min=0), dict(constraint_form="x"), dict(clock="cpu")):
        with pytest.raises(ValueError):
            LbConfig(**bad)
    with pytest.raises(ValueError):
        LbConfig.from_dict({"bogus": 1})


def test_node_clock():
    clock = make_clock("nodes", 2.0)
    lim = clock.limits(2.6, cutoff=5.0)
    assert lim.node_limit == 5 and lim.objective_cutoff == 5.0
    assert NodeClock().limits(0.1).node_limit == 1


@pytest.mark.parametrize("form", [SYMMETRIC, ASYMMETRIC])
def test_iterate_respects_ball_and_improves(form):
    rng = np.random.default_rng(4)
    for _ in range(15):
        inst, x0 = small_case(rng)
        for k in (1, 2, 4):
            out = lb_iterate(inst, x0, k, 1000, form=form)
            ball = [x for x in enumerate_binary(inst)
                    if check_feasibility(inst, x).feasible and hamming_delta(x, x0, form) <= k]
            best_in_ball = min(inst.objective(x) for x in ball)
            if out.new_incumbent is not None:
                assert hamming_delta(out.new_incumbent.values, x0, form) <= k + 1e-6
                assert out.new_incumbent.objective < x0.objective
            if out.status == LbStatus.OPTIMAL:
                assert out.new_incumbent.objective == pytest.approx(best_in_ball)
            if out.status == LbStatus.INFEASIBLE:
                assert best_in_ball >= x0.objective


def test_iterate_validates_inputs():
    inst, x0 = sc_case()
    with pytest.raises(ModelError):
        lb_iterate(inst, x0, 0.5, 10)
    with pytest.raises(ModelError):
        lb_iterate(inst, x0, 3, 0)
    bad = Assignment.of(inst, np.zeros(inst.num_vars))
    with pytest.raises(ModelError):
        lb_iterate(inst, bad, 3, 10)


def run_invariants(rec: LbRunRecord, cfg: LbConfig, x0):
    objs = [x0.objective] + [it.incumbent_obj for it in rec.iterations]
    assert all(b <= a for a, b in zip(objs, objs[1:]))
    assert rec.elapsed <= cfg.global_time_limit + cfg.node_time_limit_default * cfg.t_step ** 4
    assert rec.best.feasible and rec.best.objective == rec.final_obj
    times = [t for t, _ in rec.incumbent_events()]
    assert times == sorted(times)


def test_baseline_run_invariants_and_determinism():
    cfg = LbConfig()
    for seed in range(4):
        inst, x0 = sc_case(seed)
        rec = run_lb_baseline(inst, x0, cfg)
        run_invariants(rec, cfg, x0)
        assert rec.elapsed <= cfg.global_time_limit + cfg.node_time_limit_default
        again = run_lb_baseline(inst, x0, cfg)
        assert again.to_jsonl() == rec.to_jsonl()


def test_exclusion_soundness_on_enumerable_instances():
    rng = np.random.default_rng(8)
    cfg = LbConfig(k0_default=2, global_time_limit=200)
    for _ in range(10):
        inst, x0 = small_case(rng, n=10)
        rec = run_lb_baseline(inst, x0, cfg)
        excluded, center = [], x0
        for it in rec.iterations:
            new = it.outcome.new_incumbent
            if new is not None:
                # never inside a ball cut away by an earlier iteration
                for c, kk in excluded:
                    assert hamming_delta(new.values, c) >= kk + 1 - 1e-9
            if it.outcome.status in (LbStatus.OPTIMAL, LbStatus.IMPROVED, LbStatus.INFEASIBLE):
                excluded.append((center.values, floor_k(it.k)))
            if new is not None:
                center = new
        assert rec.best.objective >= brute_force(inst)[0] - 1e-9


def test_search_exhaustion_stops_early():
    rng = np.random.default_rng(2)
    inst, x0 = small_case(rng, n=8)
    rec = run_lb_baseline(inst, x0, LbConfig(k0_default=8, global_time_limit=10**6))
    assert "search space exhausted" in rec.notes
    assert rec.best.objective == pytest.approx(brute_force(inst)[0])


class ConstantModel:
    compact = False

    def __init__(self, phi):
        self.phi = phi

    def predict(self, state):
        return self.phi


def test_constant_regressor_matches_baseline_first_iteration():
    cfg = LbConfig()
    inst, x0 = sc_case(3)
    _, lp, _ = regression_k0(inst, x0, cfg, ConstantModel(1.0))
    k_prime = hamming_delta(lp.x, x0, inst=inst)
    rec = run_lb_with_regression(inst, x0, cfg, ConstantModel(cfg.k0_default / k_prime))
    base = run_lb_baseline(inst, x0, cfg)
    a, b = rec.iterations[0], base.iterations[0]
    assert floor_k(a.k) == floor_k(b.k) == 20
    assert a.outcome.status == b.outcome.status and a.outcome.nodes == b.outcome.nodes
    assert a.incumbent_obj == b.incumbent_obj and a.outcome.events == b.outcome.events


def test_regression_k0_fallback_when_lp_is_incumbent():
    inst = generate(GeneratorSpec("sc", seed=0))
    opt = solve_milp(inst).best
    k0, _, note = regression_k0(inst, opt, LbConfig(), ConstantModel(0.5))
    if "fallback" in note:
        assert k0 == LbConfig().k0_default
    else:
        assert k0 >= 0.5


def test_policy_runs_record_actions_and_states():
    cfg = LbConfig()
    inst, x0 = sc_case(5)
    pol = PolicyModel(seed=1)
    rec = run_lb_rl(inst, x0, cfg, pol, rng=np.random.default_rng(0))
    run_invariants(rec, cfg, x0)
    assert rec.iterations[0].k_action is None
    assert all(it.k_action in range(4) and len(it.state) == 7 for it in rec.iterations[1:])
    hyb = run_lb_rl_hybrid(inst, x0, cfg, pol, PolicyModel(seed=2), rng=np.random.default_rng(1))
    run_invariants(hyb, cfg, x0)
    assert all(cfg.t_min <= it.t <= cfg.global_time_limit for it in hyb.iterations)
    assert all(it.t_action in range(4) for it in hyb.iterations[1:])


def test_jsonl_round_trip():
    inst, x0 = sc_case(1)
    rec = run_lb_baseline(inst, x0)
    text = rec.to_jsonl()
    lines = text.strip().split("\n")
    assert json.loads(lines[0])["record"] == "run" and len(lines) == len(rec.iterations) + 1
    back = LbRunRecord.from_jsonl(text)
    assert back.to_jsonl() == text
    with pytest.raises(ValueError):
        LbRunRecord.from_jsonl(lines[1])
