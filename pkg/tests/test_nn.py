import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import gnn_fd_max_rel_error, permute_state, random_state
from lbforge import tensorio
from lbforge.nn import (
    Adam,
    GnnModel,
    PolicyModel,
    gnn_forward,
    load_model,
    policy_forward,
    policy_grad_logp,
    save_model,
    sgd_step,
    sigmoid,
    softmax,
)
from lbforge.nn.gnn import forward_and_grad
from lbforge.nn.optim import make_optimizer


def test_sigmoid_softmax_stable():
    assert sigmoid(800.0) == 1.0 and sigmoid(-800.0) == 0.0
    assert sigmoid(0.0) == 0.5
    p = softmax([1000.0, 1000.0, -1000.0])
    np.testing.assert_allclose(p, [0.5, 0.5, 0.0])


def test_init_bounds_follow_fan_in():
    m = GnnModel(d=10, hidden=16, seed=3)
    assert np.abs(m.params["v1_w"]).max() <= 1 / np.sqrt(10)
    # concatenated message layer: fan-in is 16 + 16 + 1
    assert np.abs(m.params["g1_e"]).max() <= 1 / np.sqrt(33)
    assert np.abs(m.params["o2_b"]).max() <= 1 / np.sqrt(16)
    again = GnnModel(d=10, hidden=16, seed=3)
    assert all(np.array_equal(m.params[k], again.params[k]) for k in m.params)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    s = random_state(rng)
    model = GnnModel(d=10, hidden=8, seed=seed % 7)
    pv, pc = rng.permutation(s.num_vars), rng.permutation(s.num_cons)
    assert abs(gnn_forward(model, s) - gnn_forward(model, permute_state(s, pv, pc))) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.floats(-50, 50))
def test_output_in_open_interval(seed, shift):
    rng = np.random.default_rng(seed)
    s = random_state(rng)
    model = GnnModel(d=10, hidden=8, seed=1)
    model.params["o2_b"] += shift
    phi = gnn_forward(model, s)
    assert 0.0 < phi < 1.0


@pytest.mark.parametrize("seed", range(4))
def test_gnn_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    s = random_state(rng)
    model = GnnModel(d=10, hidden=6, seed=seed)
    assert gnn_fd_max_rel_error(model, s, seed=seed) <= 1e-4


def test_squared_error_gradient():
    rng = np.random.default_rng(5)
    s = random_state(rng)
    model = GnnModel(d=10, hidden=6, seed=0)
    phi, loss, grads = forward_and_grad(model, s, 0.3)
    assert loss == pytest.approx((phi - 0.3) ** 2)
    eps = 1e-6
    p = model.params["o1_w"]
    p[0, 0] += eps
    up = (gnn_forward(model, s) - 0.3) ** 2
    p[0, 0] -= 2 * eps
    down = (gnn_forward(model, s) - 0.3) ** 2
    p[0, 0] += eps
    assert grads["o1_w"][0, 0] == pytest.approx((up - down) / (2 * eps), rel=1e-5, abs=1e-10)


def test_state_dims_checked():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError, match="do not match"):
        gnn_forward(GnnModel(d=3), random_state(rng))


def test_policy_zero_init_is_uniform_and_greedy_ties_pick_first():
    pol = PolicyModel()
    np.testing.assert_allclose(policy_forward(pol, np.ones(7)), 0.25)
    assert pol.act(np.ones(7)) == 0
    with pytest.raises(ValueError):
        policy_forward(pol, np.ones(3))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 3))
def test_policy_log_prob_gradient(seed, action):
    rng = np.random.default_rng(seed)
    pol = PolicyModel(seed=seed)
    x = rng.normal(size=7)
    g = policy_grad_logp(pol, x, action)
    eps = 1e-6
    for name in ("w", "b"):
        flat = pol.params[name].reshape(-1)
        for i in range(flat.size):
            flat[i] += eps
            up = np.log(policy_forward(pol, x)[action])
            flat[i] -= 2 * eps
            down = np.log(policy_forward(pol, x)[action])
            flat[i] += eps
            assert g[name].reshape(-1)[i] == pytest.approx((up - down) / (2 * eps), abs=1e-7)


def test_sampling_follows_probabilities():
    pol = PolicyModel()
    pol.params["b"][:] = np.log([0.7, 0.1, 0.1, 0.1])
    rng = np.random.default_rng(0)
    draws = np.array([pol.act(np.zeros(7), rng) for _ in range(4000)])
    assert abs((draws == 0).mean() - 0.7) < 0.03


def test_sgd_and_adam_minimise_quadratic():
    target = np.array([1.0, -2.0, 3.0])
    for name, lr, steps in (("sgd", 0.1, 200), ("adam", 0.05, 2000)):
        params = {"x": np.zeros(3)}
        opt = make_optimizer(name, params, lr)
        for _ in range(steps):
            opt.step(params, {"x": 2 * (params["x"] - target)})
        np.testing.assert_allclose(params["x"], target, atol=1e-3)
    with pytest.raises(ValueError):
        make_optimizer("rmsprop", {}, 0.1)


def test_adam_first_step_is_lr_times_sign():
    params = {"x": np.array([0.0, 0.0])}
    Adam(params, 0.01).step(params, {"x": np.array([3.0, -0.5])})
    np.testing.assert_allclose(params["x"], [-0.01, 0.01], rtol=1e-6)


def test_sgd_rejects_mismatched_grads():
    with pytest.raises(ValueError):
        sgd_step({"a": np.zeros(2)}, {"b": np.zeros(2)}, 0.1)
    with pytest.raises(ValueError):
        sgd_step({"a": np.zeros(2)}, {"a": np.zeros(3)}, 0.1)


def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    s = random_state(rng)
    gnn = GnnModel(d=10, hidden=8, seed=4)
    save_model(gnn, tmp_path / "g.ckpt", epoch=12)
    back = load_model(tmp_path / "g.ckpt")
    assert back.epoch == 12 and back.architecture() == gnn.architecture()
    assert gnn_forward(back, s) == gnn_forward(gnn, s)

    pol = PolicyModel(seed=2)
    save_model(pol, tmp_path / "p.ckpt")
    pback = load_model(tmp_path / "p.ckpt")
    np.testing.assert_array_equal(pback.params["w"], pol.params["w"])


def test_checkpoint_rejects_mismatch(tmp_path):
    pol = PolicyModel()
    tensorio.save(tmp_path / "bad.ckpt", {"w": pol.params["w"]}, {"architecture": pol.architecture(), "seed": None})
    with pytest.raises(tensorio.TensorFileError):
        load_model(tmp_path / "bad.ckpt")
