"""Seeded generators for the benchmark families.

Set covering follows the Balas-Ho construction, MIS uses Barabasi-Albert
graphs with the edge formulation, combinatorial auctions are a simplified
arbitrary-relationships winner determination, and ``gisp`` builds
generalized independent set instances (fixed and removable edges).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import networkx as nx
import numpy as np
import scipy.sparse as sp

from ..milp.model import MilpInstance, ModelError

FAMILIES = ("set_covering", "max_independent_set", "combinatorial_auction", "gisp")
ALIASES = {"sc": "set_covering", "mis": "max_independent_set", "ca": "combinatorial_auction", "gisp": "gisp"}


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    seed: int = 0
    rows: int = 200
    cols: int = 100
    density: float = 0.05
    nodes: int = 60
    affinity: int = 4
    items: int = 100
    bids: int = 50
    max_coef: int = 100
    removable_frac: float = 0.3
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        fam = ALIASES.get(self.family, self.family)
        object.__setattr__(self, "family", fam)
        if fam not in FAMILIES:
            raise ModelError(f"unknown family {self.family!r}")
        for name in ("rows", "cols", "nodes", "items", "bids", "max_coef"):
            if getattr(self, name) <= 0:
                raise ModelError(f"{name} must be positive")
        if not 0 < self.density <= 1:
            raise ModelError("density must be in (0, 1]")
        if fam == "set_covering" and self.cols < 2:
            raise ModelError("set covering needs at least two columns")
        if fam in ("max_independent_set", "gisp") and self.nodes <= self.affinity:
            raise ModelError("graph needs more nodes than the attachment degree")

    def scaled(self, factor: int) -> "GeneratorSpec":
        """Same family with every size parameter multiplied (the 'larger instances' sets)."""
        d = asdict(self)
        for name in ("rows", "cols", "nodes", "items", "bids"):
            d[name] *= factor
        return GeneratorSpec(**d)

    def label(self) -> str:
        short = {v: k for k, v in ALIASES.items()}[self.family]
        return f"{short}-{self.seed}"


def generate(spec: GeneratorSpec) -> MilpInstance:
    rng = np.random.default_rng(spec.seed)
    build = {
        "set_covering": _set_covering,
        "max_independent_set": _independent_set,
        "combinatorial_auction": _auction,
        "gisp": _gisp,
    }[spec.family]
    return build(spec, rng)


def _set_covering(spec, rng):
    m, n = spec.rows, spec.cols
    A = np.zeros((m, n), dtype=bool)
    for i in range(m):
        A[i, rng.choice(n, size=2, replace=False)] = True
    for j in np.flatnonzero(~A.any(axis=0)):
        A[rng.integers(m), j] = True
    target = int(round(spec.density * m * n))
    missing = target - int(A.sum())
    if missing > 0:
        free = np.flatnonzero(~A.ravel())
        A.ravel()[rng.choice(free, size=min(missing, free.size), replace=False)] = True
    c = rng.integers(1, spec.max_coef + 1, size=n)
    return MilpInstance.build(
        c, sp.csr_matrix(A.astype(float)), ["G"] * m, np.ones(m), name=spec.label(),
    )


def _edge_rows(edges, n):
    rows = np.repeat(np.arange(len(edges)), 2)
    cols = np.asarray(edges, dtype=int).ravel()
    return sp.csr_matrix((np.ones(cols.size), (rows, cols)), shape=(len(edges), n))


def _independent_set(spec, rng):
    g = nx.barabasi_albert_graph(spec.nodes, spec.affinity, seed=int(rng.integers(2**31)))
    edges = sorted(tuple(sorted(e)) for e in g.edges())
    n = spec.nodes
    return MilpInstance.build(
        np.ones(n), _edge_rows(edges, n), ["L"] * len(edges), np.ones(len(edges)),
        maximize=True, name=spec.label(),
    )


def _auction(spec, rng):
    n_items, n_bids = spec.items, spec.bids
    values = rng.integers(1, spec.max_coef + 1, size=n_items)
    popularity = rng.dirichlet(np.ones(n_items) * 0.5)
    bundles = []
    prices = []
    for _ in range(n_bids):
        size = 1 + min(int(rng.poisson(3)), n_items - 1)
        items = np.sort(rng.choice(n_items, size=size, replace=False, p=popularity))
        bundles.append(items)
        synergy = 1.0 + 0.5 * rng.random()
        prices.append(int(round(values[items].sum() * synergy)))
    rows, cols = [], []
    row = 0
    for item in range(n_items):
        bidders = [b for b, items in enumerate(bundles) if item in items]
        if len(bidders) < 2:
            continue
        rows.extend([row] * len(bidders))
        cols.extend(bidders)
        row += 1
    A = sp.csr_matrix((np.ones(len(cols)), (rows, cols)), shape=(row, n_bids))
    return MilpInstance.build(
        np.asarray(prices, dtype=float), A, ["L"] * row, np.ones(row), maximize=True, name=spec.label(),
    )


def _gisp(spec, rng):
    g = nx.barabasi_albert_graph(spec.nodes, spec.affinity, seed=int(rng.integers(2**31)))
    edges = sorted(tuple(sorted(e)) for e in g.edges())
    removable = rng.random(len(edges)) < spec.removable_frac
    n_nodes = spec.nodes
    n_rem = int(removable.sum())
    n = n_nodes + n_rem
    revenue = rng.integers(spec.max_coef // 2, spec.max_coef + spec.max_coef // 2 + 1, size=n_nodes)
    cost = rng.integers(spec.max_coef // 10, spec.max_coef // 2 + 1, size=n_rem)
    rows, cols, vals = [], [], []
    y = n_nodes
    for i, (u, v) in enumerate(edges):
        rows += [i, i]
        cols += [u, v]
        vals += [1.0, 1.0]
        if removable[i]:
            rows.append(i)
            cols.append(y)
            vals.append(-1.0)
            y += 1
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(edges), n))
    c = np.concatenate([revenue, -cost]).astype(float)
    return MilpInstance.build(c, A, ["L"] * len(edges), np.ones(len(edges)), maximize=True, name=spec.label())
