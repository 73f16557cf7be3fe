"""Primal gap, scaled primal gap, primal integral and shifted geometric means."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


def scaled_primal_gap(obj: float, opt: float) -> float:
    """Gap in [0, 1]: 0 when both are zero, 1 for opposite signs, else relative to the larger magnitude."""
    if obj == 0 and opt == 0:
        return 0.0
    if opt * obj < 0:
        return 1.0
    return abs(opt - obj) / max(abs(opt), abs(obj))


def primal_gap(obj: float, opt: float) -> float:
    """Percent gap ``|opt - obj| / |opt| * 100``.

    For ``opt == 0`` the relative gap is undefined; the scaled gap times
    100 is reported instead.
    """
    if opt == 0:
        return 100.0 * scaled_primal_gap(obj, opt)
    return abs(opt - obj) / abs(opt) * 100.0


@dataclass(frozen=True)
class MetricSeries:
    """Incumbent changes ``(time, objective)`` of one run, in the model's own sense."""

    events: tuple
    opt_obj: float
    t_max: float
    minimize: bool = True

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        times = [t for t, _ in self.events]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("event times must be strictly increasing")
        objs = [o if self.minimize else -o for _, o in self.events]
        if any(b > a for a, b in zip(objs, objs[1:])):
            raise ValueError("incumbent objectives must not get worse")

    @classmethod
    def from_events(cls, events: Sequence, opt_obj: float, t_max: float, minimize: bool = True) -> "MetricSeries":
        """Merge events sharing a time stamp (keeping the last) and drop repeats of the same objective."""
        merged: list = []
        for t, obj in sorted(events, key=lambda e: e[0]):
            if merged and merged[-1][0] == t:
                merged[-1] = (t, obj)
            elif not merged or merged[-1][1] != obj:
                merged.append((t, obj))
        return cls(tuple((float(t), float(o)) for t, o in merged), float(opt_obj), float(t_max), minimize)

    def gap_at(self, t: float) -> float:
        """Value of the step function p at time ``t`` (right-continuous)."""
        p = 1.0
        for time, obj in self.events:
            if time > t:
                break
            p = scaled_primal_gap(obj, self.opt_obj)
        return p

    def integral_until(self, t_end: float) -> float:
        total = 0.0
        t_prev, p = 0.0, 1.0
        for time, obj in self.events:
            if time >= t_end:
                break
            if time > t_prev:
                total += p * (time - t_prev)
                t_prev = time
            p = scaled_primal_gap(obj, self.opt_obj)
        return total + p * max(t_end - t_prev, 0.0)


def primal_integral(series: MetricSeries) -> float:
    """Exact integral of the primal gap step function over ``[0, t_max]``."""
    return series.integral_until(series.t_max)


def shifted_geometric_mean(values: Sequence[float], shift: float = 1.0) -> float:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return float("nan")
    if (v + shift <= 0).any():
        raise ValueError("values must exceed -shift")
    return float(np.exp(np.mean(np.log(v + shift))) - shift)
