"""Linear softmax policy over the four adjustment actions."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .functional import softmax

N_ACTIONS = 4
N_FEATURES = 7


class PolicyModel:
    """``pi(a | s) = softmax(W s + b)``; action indices follow increase, keep, decrease, reset."""

    def __init__(self, n_features: int = N_FEATURES, n_actions: int = N_ACTIONS, seed: Optional[int] = None):
        self.n_features, self.n_actions = n_features, n_actions
        self.seed = seed
        if seed is None:
            w = np.zeros((n_actions, n_features))
        else:
            bound = 1.0 / np.sqrt(n_features)
            w = np.random.default_rng(seed).uniform(-bound, bound, size=(n_actions, n_features))
        self.params = {"w": w, "b": np.zeros(n_actions)}

    def architecture(self) -> dict:
        return {"kind": "policy", "n_features": self.n_features, "n_actions": self.n_actions}

    def copy(self) -> "PolicyModel":
        m = PolicyModel.__new__(PolicyModel)
        m.__dict__.update(self.__dict__)
        m.params = {k: v.copy() for k, v in self.params.items()}
        return m

    def probs(self, s) -> np.ndarray:
        return policy_forward(self, s)

    def act(self, s, rng: Optional[np.random.Generator] = None) -> int:
        """Sample an action with ``rng``; without one take the most likely (lowest index on ties)."""
        p = policy_forward(self, s)
        if rng is None:
            return int(np.argmax(p))
        return int(rng.choice(self.n_actions, p=p))


def _vec(s) -> np.ndarray:
    return np.asarray(s.as_array() if hasattr(s, "as_array") else s, dtype=float)


def policy_forward(model: PolicyModel, s) -> np.ndarray:
    x = _vec(s)
    if x.shape != (model.n_features,):
        raise ValueError(f"state has shape {x.shape}, expected ({model.n_features},)")
    return softmax(model.params["w"] @ x + model.params["b"])


def policy_grad_logp(model: PolicyModel, s, action: int) -> dict:
    """Gradient of ``log pi(action | s)``."""
    x = _vec(s)
    p = policy_forward(model, x)
    delta = -p
    delta[action] += 1.0
    return {"w": np.outer(delta, x), "b": delta}
