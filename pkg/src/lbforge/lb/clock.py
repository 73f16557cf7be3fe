"""Time accounting for sub-MILP solves.

A ``NodeClock`` charges every processed branch-and-bound node a fixed
amount of virtual time, which makes whole runs reproducible bit for bit.
A ``WallClock`` uses real seconds.
"""

from __future__ import annotations

import math
from typing import Optional

from ..milp.model import SolveResult, SolverLimits


class NodeClock:
    deterministic = True

    def __init__(self, nodes_per_second: float = 1.0):
        if not nodes_per_second > 0:
            raise ValueError("nodes_per_second must be positive")
        self.nodes_per_second = float(nodes_per_second)

    def limits(self, t: float, cutoff: Optional[float] = None) -> SolverLimits:
        nodes = max(1, int(math.floor(t * self.nodes_per_second + 1e-9)))
        return SolverLimits(node_limit=nodes, objective_cutoff=cutoff)

    def charge(self, result: SolveResult) -> float:
        return result.nodes / self.nodes_per_second

    def at_node(self, result: SolveResult, nodes: int) -> float:
        """Time into the solve at which node ``nodes`` had been processed."""
        return nodes / self.nodes_per_second

    def __repr__(self):
        return f"NodeClock({self.nodes_per_second:g})"


class WallClock:
    deterministic = False

    def limits(self, t: float, cutoff: Optional[float] = None) -> SolverLimits:
        return SolverLimits(time_limit=t, objective_cutoff=cutoff)

    def charge(self, result: SolveResult) -> float:
        return result.elapsed

    def at_node(self, result: SolveResult, nodes: int) -> float:
        # node timestamps are not kept, interpolate linearly
        if result.nodes == 0:
            return 0.0
        return result.elapsed * nodes / result.nodes

    def __repr__(self):
        return "WallClock()"


def make_clock(kind: str = "nodes", nodes_per_second: float = 1.0):
    if kind == "nodes":
        return NodeClock(nodes_per_second)
    if kind == "wall":
        return WallClock()
    raise ValueError(f"unknown clock {kind!r}")
