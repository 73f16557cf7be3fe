"""REINFORCE for the linear k and t policies."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

import numpy as np

from ..lb.records import LbConfig
from ..lb.search import run_lb_rl, run_lb_rl_hybrid
from ..nn.optim import add_into, all_finite, sgd_step
from ..nn.policy import PolicyModel, policy_grad_logp
from .rewards import RewardParams, Trajectory, trajectory_from_record

log = logging.getLogger(__name__)


class Environment(Protocol):
    def rollout(self, policy: PolicyModel, rng: np.random.Generator) -> Trajectory: ...


class LbEnvironment:
    """One episode is one LB run on an instance drawn from ``pool``.

    ``pool`` holds ``(instance, initial_assignment)`` pairs.  For
    ``which="t"`` the frozen k policy acts greedily while the trained time
    policy samples.
    """

    def __init__(self, pool: Sequence, cfg: LbConfig = LbConfig(), which: str = "k", policy_k: Optional[PolicyModel] = None,
                 k0_source=None, reward_params: RewardParams = RewardParams()):
        if which not in ("k", "t"):
            raise ValueError("which must be 'k' or 't'")
        if which == "t" and policy_k is None:
            raise ValueError("training the time policy needs a frozen k policy")
        if not pool:
            raise ValueError("empty instance pool")
        self.pool, self.cfg, self.which = list(pool), cfg, which
        self.policy_k, self.k0_source, self.reward_params = policy_k, k0_source, reward_params
        self.last_record = None

    def rollout(self, policy: PolicyModel, rng: np.random.Generator) -> Trajectory:
        inst, initial = self.pool[int(rng.integers(len(self.pool)))]
        if self.which == "k":
            rec = run_lb_rl(inst, initial, self.cfg, policy, self.k0_source, rng=rng, algorithm="train-k")
        else:
            rec = run_lb_rl_hybrid(inst, initial, self.cfg, self.policy_k, policy, self.k0_source, rng=rng, algorithm="train-t")
        self.last_record = rec
        return trajectory_from_record(rec, self.which, self.reward_params)


class PolicyDiverged(RuntimeError):
    pass


@dataclass
class PolicyLog:
    rows: list = field(default_factory=list)  # (epoch, mean_return, episodes)

    @property
    def returns(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "mean_return", "episodes"])
            for epoch, ret, n in self.rows:
                w.writerow([epoch, repr(ret), n])


def reinforce_gradient(policy: PolicyModel, traj: Trajectory) -> dict:
    """Sum over steps of grad log pi(a_t | s_t) times the return-to-go."""
    acc: dict = {k: np.zeros_like(v) for k, v in policy.params.items()}
    for s, a, g in zip(traj.states, traj.actions, traj.returns_to_go()):
        if g != 0.0:
            add_into(acc, policy_grad_logp(policy, s, a), g)
    return acc


def train_policy_reinforce(
    env: Environment,
    policy: PolicyModel,
    lr: float,
    epochs: int = 300,
    which: str = "k",
    frozen: Optional[PolicyModel] = None,
    seed: int = 0,
    episodes_per_epoch: int = 1,
    log_path=None,
):
    """Plain REINFORCE: after every episode ``theta += lr * sum_t grad log pi * G_t``.

    ``frozen`` is the pretrained k policy when ``which="t"``; its parameters
    are verified unchanged at the end.  Returns ``(policy, PolicyLog)``.
    """
    if which == "t" and frozen is None:
        raise ValueError("training the time policy needs the frozen k policy")
    snapshot = {k: v.copy() for k, v in frozen.params.items()} if frozen is not None else None
    rng = np.random.default_rng(seed)
    plog = PolicyLog()
    for epoch in range(1, epochs + 1):
        totals = []
        for _ in range(episodes_per_epoch):
            traj = env.rollout(policy, rng)
            totals.append(traj.total)
            if len(traj) == 0:
                continue
            grad = reinforce_gradient(policy, traj)
            if not all_finite(grad):
                raise PolicyDiverged(f"non-finite policy gradient at epoch {epoch}")
            sgd_step(policy.params, {k: -g for k, g in grad.items()}, lr)
            if not all_finite(policy.params):
                raise PolicyDiverged(f"non-finite policy parameters at epoch {epoch}")
        plog.rows.append((epoch, float(np.mean(totals)), len(totals)))
        log.debug("epoch %d mean return %.6g", epoch, plog.rows[-1][1])
    if snapshot is not None:
        for k, v in frozen.params.items():
            if not np.array_equal(v, snapshot[k]):
                raise RuntimeError("frozen k policy was modified during training")
    policy.epoch = epochs
    if log_path is not None:
        plog.write_csv(log_path)
    return policy, plog
