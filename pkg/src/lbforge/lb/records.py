"""Configuration and per-iteration trace types for local branching runs."""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

import numpy as np

from ..milp.model import Assignment
from .clock import make_clock
from .constraint import FORMS, SYMMETRIC


class LbStatus(str, enum.Enum):
    OPTIMAL = "optimal"  # sub-MILP solved and the incumbent improved
    INFEASIBLE = "infeasible"  # sub-MILP proven to hold nothing better
    IMPROVED = "improved"  # limit hit with a better incumbent
    NOT_IMPROVED = "not_improved"  # limit hit without one

    @property
    def improving(self) -> bool:
        return self in (LbStatus.OPTIMAL, LbStatus.IMPROVED)


STATUS_ORDER = (LbStatus.OPTIMAL, LbStatus.INFEASIBLE, LbStatus.IMPROVED, LbStatus.NOT_IMPROVED)


@dataclass(frozen=True)
class LbConfig:
    """Settings shared by every local branching runner.

    Times are in seconds of the configured clock.  With ``clock="nodes"``
    one second is ``nodes_per_second`` branch-and-bound nodes.
    """

    k0_default: float = 20.0
    node_time_limit_default: float = 10.0
    global_time_limit: float = 60.0
    k_step: float = 0.5
    t_step: float = 2.0
    t_min: float = 1.0
    constraint_form: str = SYMMETRIC
    clock: str = "nodes"
    nodes_per_second: float = 1.0

    def __post_init__(self):
        for name in ("k0_default", "node_time_limit_default", "global_time_limit", "t_min", "nodes_per_second"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.k_step < 1:
            raise ValueError("k_step must lie in (0, 1)")
        if not self.t_step > 1:
            raise ValueError("t_step must exceed 1")
        if self.constraint_form not in FORMS:
            raise ValueError(f"constraint_form must be one of {FORMS}")
        make_clock(self.clock, self.nodes_per_second)

    def make_clock(self):
        return make_clock(self.clock, self.nodes_per_second)

    def with_(self, **kw) -> "LbConfig":
        return replace(self, **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "LbConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown LB settings: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class LbIterationOutcome:
    status: LbStatus
    new_incumbent: Optional[Assignment]
    elapsed: float
    obj_improvement: float
    nodes: int = 0
    error: bool = False
    events: tuple = ()  # (seconds into the iteration, objective) per better solution


@dataclass(frozen=True, eq=False)
class LbIteration:
    k: float
    t: float
    outcome: LbIterationOutcome
    incumbent_obj: float
    elapsed_total: float
    state: Optional[tuple] = None  # policy input the step was chosen from
    k_action: Optional[int] = None
    t_action: Optional[int] = None


@dataclass(eq=False)
class LbRunRecord:
    t_max: float
    initial_obj: float
    algorithm: str = ""
    instance: str = ""
    k0: float = 0.0
    iterations: list = field(default_factory=list)
    best: Optional[Assignment] = None
    notes: list = field(default_factory=list)

    @property
    def final_obj(self) -> float:
        return self.iterations[-1].incumbent_obj if self.iterations else self.initial_obj

    @property
    def elapsed(self) -> float:
        return self.iterations[-1].elapsed_total if self.iterations else 0.0

    def incumbent_events(self) -> list[tuple[float, float]]:
        """(time, objective) whenever the incumbent changes, starting at time 0."""
        events = [(0.0, self.initial_obj)]
        start = 0.0
        for it in self.iterations:
            for dt, obj in it.outcome.events:
                events.append((start + dt, obj))
            start = it.elapsed_total
        return events

    # -- JSON lines ---------------------------------------------------------

    def to_jsonl(self) -> str:
        head = {
            "record": "run",
            "algorithm": self.algorithm,
            "instance": self.instance,
            "t_max": self.t_max,
            "initial_obj": self.initial_obj,
            "k0": self.k0,
            "final_obj": self.final_obj,
            "elapsed": self.elapsed,
            "notes": list(self.notes),
        }
        lines = [json.dumps(head, sort_keys=True)]
        for i, it in enumerate(self.iterations):
            out = it.outcome
            lines.append(
                json.dumps(
                    {
                        "record": "iteration",
                        "index": i,
                        "k": it.k,
                        "t": it.t,
                        "status": out.status.value,
                        "elapsed": out.elapsed,
                        "obj_improvement": out.obj_improvement,
                        "nodes": out.nodes,
                        "error": out.error,
                        "events": [list(e) for e in out.events],
                        "incumbent_obj": it.incumbent_obj,
                        "elapsed_total": it.elapsed_total,
                        "state": None if it.state is None else list(it.state),
                        "k_action": it.k_action,
                        "t_action": it.t_action,
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "LbRunRecord":
        lines = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not lines or lines[0].get("record") != "run":
            raise ValueError("run record must start with a header line")
        head = lines[0]
        rec = cls(
            t_max=head["t_max"],
            initial_obj=head["initial_obj"],
            algorithm=head["algorithm"],
            instance=head["instance"],
            k0=head["k0"],
            notes=list(head.get("notes", [])),
        )
        for d in lines[1:]:
            out = LbIterationOutcome(
                status=LbStatus(d["status"]),
                new_incumbent=None,
                elapsed=d["elapsed"],
                obj_improvement=d["obj_improvement"],
                nodes=d["nodes"],
                error=d["error"],
                events=tuple(tuple(e) for e in d["events"]),
            )
            rec.iterations.append(
                LbIteration(
                    k=d["k"],
                    t=d["t"],
                    outcome=out,
                    incumbent_obj=d["incumbent_obj"],
                    elapsed_total=d["elapsed_total"],
                    state=None if d["state"] is None else tuple(d["state"]),
                    k_action=d["k_action"],
                    t_action=d["t_action"],
                )
            )
        return rec


def state_array(it: LbIteration) -> np.ndarray:
    return np.asarray(it.state, dtype=float)
