import numpy as np
import pytest

from lbforge.bench import GeneratorSpec, generate
from lbforge.lb import EVERY_F_NODES, ROOT_ONLY, LbConfig, run_as_primal_heuristic
from lbforge.milp import MilpInstance, SolverLimits, SolveStatus, solve_milp


def test_root_only_on_root_solved_instance_calls_lb_once():
    inst = MilpInstance.build([1, 1, 1], [[1, 0, 0], [0, 1, 1]], "GG", [1, 1])
    res = run_as_primal_heuristic(inst, ROOT_ONLY)
    assert res.lb_calls == 1
    assert res.status == SolveStatus.OPTIMAL and res.objective == 2


def test_hook_never_hurts_at_equal_node_limit():
    for seed in range(3):
        inst = generate(GeneratorSpec("mis", seed=100 + seed))
        lim = SolverLimits(node_limit=20)
        plain = solve_milp(inst, lim)
        hooked = run_as_primal_heuristic(inst, ROOT_ONLY, limits=lim)
        assert hooked.objective <= plain.objective
        assert hooked.nodes <= 1.05 * plain.nodes


def test_every_f_nodes_runs_and_only_on_new_incumbents():
    inst = generate(GeneratorSpec("gisp", seed=101))
    res = run_as_primal_heuristic(inst, EVERY_F_NODES, f=3, limits=SolverLimits(node_limit=30))
    assert res.lb_calls <= 10
    assert res.best is not None and res.best.feasible
    default = run_as_primal_heuristic(inst, EVERY_F_NODES, limits=SolverLimits(node_limit=30))
    assert default.lb_calls == 0  # f = 100 is never reached within 30 nodes


def test_failing_lb_is_logged_and_solve_continues(caplog):
    inst = generate(GeneratorSpec("sc", seed=1))

    def broken(inst, x0, cfg):
        raise RuntimeError("boom")

    res = run_as_primal_heuristic(inst, ROOT_ONLY, lb_variant=broken)
    assert res.lb_failures == 1 and res.status == SolveStatus.OPTIMAL
    assert "boom" in caplog.text


def test_bad_arguments():
    inst = generate(GeneratorSpec("sc", seed=1))
    with pytest.raises(ValueError):
        run_as_primal_heuristic(inst, "sometimes")
    with pytest.raises(ValueError):
        run_as_primal_heuristic(inst, EVERY_F_NODES, f=0)
    with pytest.raises(ValueError):
        run_as_primal_heuristic(inst, ROOT_ONLY, lb_variant="lb-srm")  # needs a model
