import numpy as np


def sgd_step(params: dict, grads: dict, lr: float) -> dict:
    """In-place ``p -= lr * g`` for every entry; returns ``params``."""
    if params.keys() != grads.keys():
        raise ValueError("parameter and gradient names differ")
    for name, p in params.items():
        g = grads[name]
        if np.shape(g) != p.shape:
            raise ValueError(f"gradient for {name} has shape {np.shape(g)}, expected {p.shape}")
        p -= lr * g
    return params


def add_into(acc: dict, grads: dict, scale: float = 1.0) -> dict:
    for name, g in grads.items():
        if name in acc:
            acc[name] += scale * g
        else:
            acc[name] = scale * np.array(g, dtype=float)
    return acc


def all_finite(d: dict) -> bool:
    return all(np.isfinite(v).all() for v in d.values())


class Adam:
    """Adam with bias correction; ``step`` updates ``params`` in place."""

    def __init__(self, params: dict, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict) -> dict:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for name, p in params.items():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
        return params


class Sgd:
    def __init__(self, params: dict, lr: float):
        self.lr = lr

    def step(self, params: dict, grads: dict) -> dict:
        return sgd_step(params, grads, self.lr)


def make_optimizer(name: str, params: dict, lr: float):
    if name == "adam":
        return Adam(params, lr)
    if name == "sgd":
        return Sgd(params, lr)
    raise ValueError(f"unknown optimizer {name!r}")
