import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_binary_instance
from lbforge.bench import GeneratorSpec, generate, initial_solution
from lbforge.features import (
    COMPACT_COLUMNS,
    RL_COLUMNS,
    VAR_COLUMNS,
    BipartiteState,
    extract_bipartite,
    extract_rl_state,
)
from lbforge.lb import LbIterationOutcome, LbRunRecord, LbStatus
from lbforge.milp import CONTINUOUS, INTEGER, MilpInstance, ModelError
from lbforge import tensorio


def test_hand_computed_features():
    inst = MilpInstance.build(
        [2, -4, 1], [[3, 0, 4], [1, 1, 0]], "LG", [0, 2], var_kind=[0, INTEGER, CONTINUOUS],
        lb=[0, -2e5, 0], ub=[1, 5, np.inf],
    )
    s = extract_bipartite(inst, [1, 2, 0.5])
    assert s.var_columns == VAR_COLUMNS
    np.testing.assert_allclose(s.column("coef"), [0.5, -1, 0.25])
    np.testing.assert_array_equal(s.column("binary"), [1, 0, 0])
    np.testing.assert_array_equal(s.column("integer"), [0, 1, 0])
    np.testing.assert_array_equal(s.column("continuous"), [0, 0, 1])
    np.testing.assert_array_equal(s.column("imp_integer"), [0, 0, 0])
    np.testing.assert_array_equal(s.column("has_ub"), [1, 1, 0])
    np.testing.assert_allclose(s.column("lb"), [0, -1, 0])
    np.testing.assert_allclose(s.column("ub"), [1e-4, 5e-4, 1])
    np.testing.assert_array_equal(s.column("sol_val"), [1, 2, 0.5])
    # row 0: [3, 0, 4 | 0], norm 5; row 1 is >= so negated: [-1, -1 | -2], norm sqrt(6)
    np.testing.assert_array_equal(s.edge_index, [[0, 0, 1, 1], [0, 2, 0, 1]])
    r6 = np.sqrt(6)
    np.testing.assert_allclose(s.edge_feats.ravel(), [0.6, 0.8, -1 / r6, -1 / r6])
    np.testing.assert_allclose(s.con_feats.ravel(), [0, -2 / r6])


def test_compact_columns_and_validation():
    inst = generate(GeneratorSpec("sc", seed=0))
    x0 = initial_solution(inst, "first")
    s = extract_bipartite(inst, x0, compact=True)
    assert s.var_columns == COMPACT_COLUMNS and s.var_feats.shape == (inst.num_vars, 3)
    with pytest.raises(ModelError):
        extract_bipartite(inst, np.zeros(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_state_round_trip_and_ranges(seed):
    rng = np.random.default_rng(seed)
    inst = random_binary_instance(rng)
    s = extract_bipartite(inst, rng.integers(0, 2, inst.num_vars).astype(float))
    assert np.abs(s.edge_feats).max(initial=0) <= 1 + 1e-12
    assert np.abs(s.column("coef")).max(initial=0) <= 1
    back, meta = BipartiteState.from_bytes(s.to_bytes({"instance": "x"}))
    assert meta["instance"] == "x"
    for name in ("con_feats", "edge_index", "edge_feats", "var_feats"):
        np.testing.assert_array_equal(getattr(back, name), getattr(s, name))


def test_rl_state():
    rec = LbRunRecord(t_max=60, initial_obj=-200.0)
    out = LbIterationOutcome(LbStatus.IMPROVED, None, elapsed=4.0, obj_improvement=10.0)
    st_ = extract_rl_state(out, rec, True, t_limit=10.0)
    assert st_.as_tuple() == (0, 0, 1, 0, 1, 0.6, 0.05)
    assert len(RL_COLUMNS) == 7
    over = LbIterationOutcome(LbStatus.NOT_IMPROVED, None, elapsed=12.0, obj_improvement=0.0)
    assert extract_rl_state(over, rec, False, t_limit=10.0).t_available == 0.0
    with pytest.raises(ValueError):
        extract_rl_state(out, rec, False)


def test_tensor_container():
    t = {"a": np.arange(6, dtype=np.int32).reshape(2, 3), "b": np.array([1.5, -2.0])}
    buf = tensorio.encode(t, {"k": 1})
    assert buf[:4] == b"LBFT"
    back, meta = tensorio.decode(buf)
    assert meta == {"k": 1} and back["a"].dtype == np.int64
    np.testing.assert_array_equal(back["a"], t["a"])
    with pytest.raises(tensorio.TensorFileError):
        tensorio.decode(b"NOPE" + buf[4:])
    with pytest.raises(tensorio.TensorFileError):
        tensorio.decode(buf[:-3])
