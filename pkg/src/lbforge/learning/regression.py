"""Supervised training of the ratio regressor."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..features import COMPACT_COLUMNS
from ..nn.gnn import GnnModel, _forward, _Graph, forward_and_grad
from ..nn.optim import add_into, all_finite, make_optimizer

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class RegressionLog:
    rows: list = field(default_factory=list)  # (epoch, train_mse, val_mse)
    best_epoch: int = 0
    test_mse: float = float("nan")
    split: tuple = ()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "train_mse", "val_mse"])
            for row in self.rows:
                w.writerow([row[0], repr(row[1]), repr(row[2])])


def split_indices(n: int, fractions=(0.7, 0.1, 0.2), seed: int = 0):
    """Seeded shuffle cut into train/validation/test index arrays."""
    if n <= 0:
        raise ValueError("dataset is empty")
    if not np.isclose(sum(fractions), 1.0):
        raise ValueError("split fractions must sum to 1")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = max(1, int(round(fractions[0] * n)))
    n_val = int(round(fractions[1] * n))
    n_val = min(n_val, n - n_train)
    return perm[:n_train], perm[n_train : n_train + n_val], perm[n_train + n_val :]


def _mse(model, items) -> float:
    if not items:
        return float("nan")
    return float(np.mean([(_forward(model, s, g)[0] - y) ** 2 for s, y, g in items]))


def train_regression(
    samples: Sequence,
    epochs: int = 300,
    lr: float = 1e-4,
    split=(0.7, 0.1, 0.2),
    seed: int = 0,
    optimizer: str = "adam",
    batch_size: int = 1,
    model: Optional[GnnModel] = None,
    log_path=None,
):
    """Fit the GNN to ``(state, phi0_star)`` pairs by mean squared error.

    ``samples`` holds ``LabeledSample`` objects or ``(state, target)`` pairs.
    Returns ``(model, RegressionLog)`` where the model is the checkpoint with
    the lowest validation error (training error when there is no
    validation split).
    """
    pairs = [(s.state, s.phi0_star) if hasattr(s, "phi0_star") else (s[0], float(s[1])) for s in samples]
    if not pairs:
        raise ValueError("dataset is empty")
    tr_idx, va_idx, te_idx = split_indices(len(pairs), split, seed)
    items = [(s, y, _Graph(s)) for s, y in pairs]
    train = [items[i] for i in tr_idx]
    val = [items[i] for i in va_idx]
    test = [items[i] for i in te_idx]
    if model is None:
        s0 = pairs[0][0]
        model = GnnModel(
            d=s0.var_feats.shape[1], q=s0.con_feats.shape[1], e=s0.edge_feats.shape[1],
            seed=seed, compact=tuple(s0.var_columns) == COMPACT_COLUMNS,
        )
    opt = make_optimizer(optimizer, model.params, lr)
    rng = np.random.default_rng(seed + 1)
    rlog = RegressionLog(split=(len(train), len(val), len(test)))
    best, best_score = model.copy(), np.inf
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(train))
        losses = []
        for lo in range(0, len(order), batch_size):
            batch = order[lo : lo + batch_size]
            acc: dict = {}
            for i in batch:
                s, y, g = train[i]
                _, loss, grads = forward_and_grad(model, s, y, g)
                losses.append(loss)
                add_into(acc, grads, 1.0 / len(batch))
            if not (np.isfinite(losses[-1]) and all_finite(acc)):
                raise TrainingDiverged(f"non-finite loss or gradient at epoch {epoch}")
            opt.step(model.params, acc)
        train_mse = float(np.mean(losses))
        val_mse = _mse(model, val)
        rlog.rows.append((epoch, train_mse, val_mse))
        score = val_mse if val else _mse(model, train)
        if not np.isfinite(score):
            raise TrainingDiverged(f"non-finite evaluation loss at epoch {epoch}")
        if score < best_score:
            best, best_score, rlog.best_epoch = model.copy(), score, epoch
        log.debug("epoch %d train %.6g val %.6g", epoch, train_mse, val_mse)
    best.epoch = rlog.best_epoch
    rlog.test_mse = _mse(best, test)
    if log_path is not None:
        rlog.write_csv(log_path)
    return best, rlog
