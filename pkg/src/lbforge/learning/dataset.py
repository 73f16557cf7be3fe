"""Label datasets on disk: ``<id>.state`` tensor container plus ``<id>.json`` label."""

from __future__ import annotations

import json
import os

from ..features import BipartiteState
from .labels import GridPoint, LabeledSample


def save_sample(directory, sample_id: str, sample: LabeledSample) -> None:
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, f"{sample_id}.state"), "wb") as fh:
        fh.write(sample.state.to_bytes({"instance": sample.instance}))
    with open(os.path.join(directory, f"{sample_id}.json"), "w") as fh:
        json.dump(sample.label_record(), fh, sort_keys=True)
        fh.write("\n")


def load_sample(directory, sample_id: str) -> LabeledSample:
    with open(os.path.join(directory, f"{sample_id}.state"), "rb") as fh:
        state, _ = BipartiteState.from_bytes(fh.read())
    with open(os.path.join(directory, f"{sample_id}.json")) as fh:
        rec = json.load(fh)
    return LabeledSample(
        state=state,
        k_prime=rec["k_prime"],
        k0_star=rec["k0_star"],
        phi0_star=rec["phi0_star"],
        cost_curve=[GridPoint(*p) for p in rec["cost_curve"]],
        instance=rec["instance"],
    )


def sample_ids(directory) -> list[str]:
    return sorted(f[: -len(".json")] for f in os.listdir(directory) if f.endswith(".json"))


def load_dataset(*directories) -> list[LabeledSample]:
    """All samples of the given directories, in sorted id order per directory."""
    out = []
    for d in directories:
        out.extend(load_sample(d, i) for i in sample_ids(d))
    return out
