"""Label generation, regression training and REINFORCE for the LB controls."""

from .dataset import load_dataset, load_sample, save_sample
from .labels import CostMetricParams, GridPoint, LabeledSample, cost_metric, generate_label, phi_grid, select_label
from .regression import RegressionLog, TrainingDiverged, split_indices, train_regression
from .reinforce import LbEnvironment, PolicyDiverged, PolicyLog, reinforce_gradient, train_policy_reinforce
from .rewards import RewardParams, Trajectory, reward_k, reward_t, step_rewards_k, step_rewards_t, trajectory_from_record
