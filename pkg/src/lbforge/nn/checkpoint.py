"""Model checkpoints in the tensor container format (see ``lbforge.tensorio``).

The header meta carries ``architecture`` (constructor arguments plus
``kind``), ``seed`` and ``epoch``; every parameter is one float64 tensor
named as in ``model.params``.
"""

from __future__ import annotations

from .. import tensorio
from .gnn import GnnModel
from .policy import PolicyModel


def save_model(model, path, epoch: int = 0, extra: dict | None = None) -> None:
    meta = {"architecture": model.architecture(), "seed": model.seed, "epoch": epoch}
    meta.update(extra or {})
    tensorio.save(path, {k: v.astype(float) for k, v in model.params.items()}, meta)


def load_model(path):
    tensors, meta = tensorio.load(path)
    arch = dict(meta["architecture"])
    kind = arch.pop("kind")
    if kind == "gnn":
        model = GnnModel(**arch, seed=meta.get("seed") or 0)
    elif kind == "policy":
        model = PolicyModel(**arch)
        model.seed = meta.get("seed")
    else:
        raise tensorio.TensorFileError(f"unknown model kind {kind!r}")
    if set(tensors) != set(model.params):
        raise tensorio.TensorFileError("checkpoint parameters do not match the architecture")
    for name, arr in tensors.items():
        if arr.shape != model.params[name].shape:
            raise tensorio.TensorFileError(f"parameter {name} has shape {arr.shape}")
        model.params[name] = arr.astype(float)
    model.epoch = meta.get("epoch", 0)
    return model
