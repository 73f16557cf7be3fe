"""Numpy models with hand-written gradients: the GNN regressor and the linear policy."""

from .checkpoint import load_model, save_model
from .functional import relu, sigmoid, softmax
from .gnn import GnnModel, gnn_backward, gnn_forward
from .optim import Adam, sgd_step
from .policy import PolicyModel, policy_forward, policy_grad_logp
