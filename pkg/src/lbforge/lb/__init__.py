"""Local branching: distance constraints, search loops and the in-solver heuristic."""

from .clock import NodeClock, WallClock, make_clock
from .constraint import ASYMMETRIC, LEFT, RIGHT, SYMMETRIC, add_lb_constraint, floor_k, hamming_delta, k_max
from .records import LbConfig, LbIteration, LbIterationOutcome, LbRunRecord, LbStatus
from .search import (
    ACTION_NAMES,
    DECREASE,
    INCREASE,
    KEEP,
    RESET,
    apply_k_action,
    apply_t_action,
    baseline_k_update,
    lb_iterate,
    run_lb,
    run_lb_baseline,
    run_lb_rl,
    run_lb_rl_hybrid,
    run_lb_with_regression,
)
from .heuristic import EVERY_F_NODES, ROOT_ONLY, HeuristicSolveResult, run_as_primal_heuristic
from .variants import ALGORITHMS, make_runner
