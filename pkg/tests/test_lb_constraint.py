import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import enumerate_binary, random_binary_instance
from lbforge.lb import ASYMMETRIC, LEFT, RIGHT, SYMMETRIC, add_lb_constraint, floor_k, hamming_delta, k_max
from lbforge.lb.constraint import distance_terms
from lbforge.milp import CONTINUOUS, MilpInstance, ModelError, check_feasibility


def brute_delta(x, ref, form):
    on = ref > 0.5
    d = np.sum(1 - x[on])
    return d if form == ASYMMETRIC else d + np.sum(x[~on])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([SYMMETRIC, ASYMMETRIC]))
def test_distance_terms_agree_with_direct_count(seed, form):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 12))
    ref, x = rng.integers(0, 2, n).astype(float), rng.random(n)
    inst = MilpInstance.build(np.zeros(n), np.zeros((1, n)), "L", [0])
    coef, const = distance_terms(inst, ref, form)
    assert coef @ x + const == pytest.approx(brute_delta(x, ref, form))
    assert hamming_delta(x, ref, form) == pytest.approx(brute_delta(x, ref, form))


def test_delta_ignores_non_binaries():
    inst = MilpInstance.build([0, 0], [[1, 1]], "L", [5], var_kind=[0, CONTINUOUS], ub=[1, 4])
    ref = np.array([1.0, 3.0])
    assert hamming_delta(np.array([0.0, 0.0]), ref, inst=inst) == 1
    assert k_max(inst, ref, SYMMETRIC) == 1


@pytest.mark.parametrize("form", [SYMMETRIC, ASYMMETRIC])
def test_left_and_right_children_partition(form):
    rng = np.random.default_rng(1)
    for _ in range(20):
        inst = random_binary_instance(rng, n=7, m=2)
        ref = rng.integers(0, 2, 7).astype(float)
        for k in (1, 2.7, 3):
            left = add_lb_constraint(inst, ref, k, LEFT, form)
            right = add_lb_constraint(inst, ref, k, RIGHT, form)
            for x in enumerate_binary(inst):
                base = check_feasibility(inst, x).feasible
                in_left = check_feasibility(left, x).feasible
                in_right = check_feasibility(right, x).feasible
                d = brute_delta(x, ref, form)
                assert in_left == (base and d <= floor_k(k))
                assert in_right == (base and d >= floor_k(k) + 1)


def test_floor_k_tolerance_and_validation():
    assert floor_k(2.9999999999) == 3
    assert floor_k(2.5) == 2
    inst = MilpInstance.build([1, 1], [[1, 1]], "L", [2])
    with pytest.raises(ModelError):
        add_lb_constraint(inst, np.array([1.0, 0.0]), 0.5)
    with pytest.raises(ModelError):
        add_lb_constraint(inst, np.array([1.0, 0.0]), 2, direction="sideways")
    with pytest.raises(ModelError):
        hamming_delta([1, 0], [1, 0], form="manhattan")


def test_k_max_by_form():
    inst = MilpInstance.build([1, 1, 1], [[1, 1, 1]], "L", [3])
    ref = np.array([1.0, 0.0, 1.0])
    assert k_max(inst, ref, SYMMETRIC) == 3
    assert k_max(inst, ref, ASYMMETRIC) == 2
