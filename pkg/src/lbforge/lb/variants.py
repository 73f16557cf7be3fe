"""Named LB variants bound to their models, as used by the harness and the CLI."""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

from ..milp.model import Assignment, MilpInstance
from .records import LbConfig, LbRunRecord
from .search import run_lb_baseline, run_lb_rl, run_lb_rl_hybrid, run_lb_with_regression

ALGORITHMS = ("lb-base", "lb-sr", "lb-srm", "lb-rl", "lb-srmrl", "lb-srmrl-adapt-t")

# model slots each algorithm needs: sr_model is a per-family regressor,
# k_model the regressor trained on the mixed set
REQUIRED_MODELS = {
    "lb-base": (),
    "lb-sr": ("sr_model",),
    "lb-srm": ("k_model",),
    "lb-rl": ("pi_k",),
    "lb-srmrl": ("k_model", "pi_k"),
    "lb-srmrl-adapt-t": ("k_model", "pi_k", "pi_t"),
}

Runner = Callable[[MilpInstance, Assignment, LbConfig], LbRunRecord]


def make_runner(algorithm: str, models: Mapping = {}, sample_seed=None) -> Runner:
    """Runner for ``algorithm``.

    With ``sample_seed`` the learned policies sample their actions from a
    generator seeded with it (a fresh one per call); otherwise they act
    greedily.
    """
    if algorithm not in REQUIRED_MODELS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {', '.join(ALGORITHMS)}")
    missing = [m for m in REQUIRED_MODELS[algorithm] if models.get(m) is None]
    if missing:
        raise ValueError(f"{algorithm} needs model(s): {', '.join(missing)}")
    m = models

    def rngs():
        if sample_seed is None:
            return None, None
        ss = np.random.SeedSequence(sample_seed).spawn(2)
        return np.random.default_rng(ss[0]), np.random.default_rng(ss[1])

    if algorithm == "lb-base":
        return lambda inst, x0, cfg: run_lb_baseline(inst, x0, cfg)
    if algorithm == "lb-sr":
        return lambda inst, x0, cfg: run_lb_with_regression(inst, x0, cfg, m["sr_model"], algorithm="lb-sr")
    if algorithm == "lb-srm":
        return lambda inst, x0, cfg: run_lb_with_regression(inst, x0, cfg, m["k_model"], algorithm="lb-srm")
    if algorithm == "lb-rl":
        return lambda inst, x0, cfg: run_lb_rl(inst, x0, cfg, m["pi_k"], rng=rngs()[0], algorithm="lb-rl")
    if algorithm == "lb-srmrl":
        return lambda inst, x0, cfg: run_lb_rl(inst, x0, cfg, m["pi_k"], m["k_model"], rng=rngs()[0], algorithm="lb-srmrl")

    def hybrid(inst, x0, cfg):
        rng_k, rng_t = rngs()
        return run_lb_rl_hybrid(inst, x0, cfg, m["pi_k"], m["pi_t"], m["k_model"], rng=rng_t, rng_k=rng_k,
                                algorithm="lb-srmrl-adapt-t")

    return hybrid
