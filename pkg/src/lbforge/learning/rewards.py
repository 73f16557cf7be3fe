"""Rewards for the k and t policies, and trajectories replayed from run records."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..lb.records import LbRunRecord, LbStatus


@dataclass(frozen=True)
class RewardParams:
    """``penalty_sign=-1`` subtracts the penalty; ``+1`` adds it as literally summed."""

    beta1: float = 1.0
    beta2: float = 1.0
    penalty_sign: float = -1.0

    def __post_init__(self):
        if not (self.beta1 > 0 and self.beta2 > 0):
            raise ValueError("beta1 and beta2 must be positive")
        if self.penalty_sign not in (-1.0, 1.0):
            raise ValueError("penalty_sign must be -1 or +1")


def reward_k(o_imp: float, t_max: float, t_elaps: float) -> float:
    """Improvement weighted by the time still left in the global budget."""
    return o_imp * (t_max - min(t_elaps, t_max))


def reward_t(r1: float, subproblem_unsolved_no_improvement: bool, params: RewardParams = RewardParams()) -> float:
    r_p = 1.0 if subproblem_unsolved_no_improvement else 0.0
    return params.beta1 * r1 + params.penalty_sign * params.beta2 * r_p


@dataclass
class Trajectory:
    states: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    rewards: list = field(default_factory=list)

    def __len__(self):
        return len(self.actions)

    def append(self, state, action: int, reward: float):
        if not np.isfinite(reward):
            raise ValueError("reward must be finite")
        self.states.append(np.asarray(state, dtype=float))
        self.actions.append(int(action))
        self.rewards.append(float(reward))

    def returns_to_go(self) -> np.ndarray:
        """Undiscounted sums of the remaining rewards."""
        return np.cumsum(np.asarray(self.rewards)[::-1])[::-1]

    @property
    def total(self) -> float:
        return float(sum(self.rewards))


def step_rewards_k(record: LbRunRecord) -> list[float]:
    scale = max(abs(record.initial_obj), 1.0)
    return [reward_k(it.outcome.obj_improvement / scale, record.t_max, it.elapsed_total) for it in record.iterations]


def step_rewards_t(record: LbRunRecord, params: RewardParams = RewardParams()) -> list[float]:
    return [
        reward_t(r1, it.outcome.status == LbStatus.NOT_IMPROVED, params)
        for r1, it in zip(step_rewards_k(record), record.iterations)
    ]


def trajectory_from_record(record: LbRunRecord, which: str = "k", params: RewardParams = RewardParams()) -> Trajectory:
    """Steps where the policy acted: state before the iteration, its action, its reward."""
    rewards = step_rewards_k(record) if which == "k" else step_rewards_t(record, params)
    traj = Trajectory()
    for it, r in zip(record.iterations, rewards):
        action = it.k_action if which == "k" else it.t_action
        if action is None or it.state is None:
            continue
        traj.append(it.state, action, r)
    return traj
