"""Bipartite message-passing regressor with hand-written gradients.

Per-side input MLPs embed variable and constraint features.  One
convolution round follows: a variable-to-constraint half-layer, then a
constraint-to-variable half-layer, each summing ReLU messages over
neighbors.  A per-variable MLP scores every variable, the scores are
averaged and squashed by a sigmoid.

Weights are stored as ``(fan_in, fan_out)`` matrices in ``params``.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..features import BipartiteState
from .functional import relu, sigmoid

HIDDEN = 64
_EPS = 1e-15


def _shapes(d: int, q: int, e: int, h: int) -> dict:
    return {
        "v1_w": (d, h), "v1_b": (h,), "v2_w": (h, h), "v2_b": (h,),
        "c1_w": (q, h), "c1_b": (h,), "c2_w": (h, h), "c2_b": (h,),
        # var -> con half-layer: message from [target con, source var, edge]
        "g1_t": (h, h), "g1_s": (h, h), "g1_e": (e, h), "g1_b": (h,),
        "f1_p": (h, h), "f1_a": (h, h), "f1_b": (h,),
        # con -> var half-layer
        "g2_t": (h, h), "g2_s": (h, h), "g2_e": (e, h), "g2_b": (h,),
        "f2_p": (h, h), "f2_a": (h, h), "f2_b": (h,),
        "o1_w": (h, h), "o1_b": (h,), "o2_w": (h, 1), "o2_b": (1,),
    }


# blocks that form one concatenated linear layer share a fan-in
_FAN_IN_GROUPS = {
    "g1": ("g1_t", "g1_s", "g1_e"), "f1": ("f1_p", "f1_a"),
    "g2": ("g2_t", "g2_s", "g2_e"), "f2": ("f2_p", "f2_a"),
}


class GnnModel:
    def __init__(self, d: int, q: int = 1, e: int = 1, hidden: int = HIDDEN, seed: int = 0, compact: bool = False):
        self.d, self.q, self.e, self.hidden = d, q, e, hidden
        self.seed = seed
        self.compact = compact
        self.params = self._init(seed)

    def _init(self, seed: int) -> dict:
        rng = np.random.default_rng(seed)
        shapes = _shapes(self.d, self.q, self.e, self.hidden)
        fan_in = {}
        for blocks in _FAN_IN_GROUPS.values():
            total = sum(shapes[b][0] for b in blocks)
            for b in blocks:
                fan_in[b] = total
        params = {}
        for name, shape in shapes.items():
            if name.endswith("_b"):
                layer = name[:-2]
                group = _FAN_IN_GROUPS.get(layer)
                fi = fan_in[group[0]] if group else shapes[layer + "_w"][0]
            else:
                fi = fan_in.get(name, shape[0])
            bound = 1.0 / np.sqrt(fi)
            params[name] = rng.uniform(-bound, bound, size=shape)
        return params

    def architecture(self) -> dict:
        return {"kind": "gnn", "d": self.d, "q": self.q, "e": self.e, "hidden": self.hidden, "compact": self.compact}

    def copy(self) -> "GnnModel":
        m = GnnModel.__new__(GnnModel)
        m.__dict__.update(self.__dict__)
        m.params = {k: v.copy() for k, v in self.params.items()}
        return m

    def predict(self, s: BipartiteState) -> float:
        return gnn_forward(self, s)


class _Graph:
    """Incidence matrices for sum aggregation, cached per state."""

    def __init__(self, s: BipartiteState):
        n, m = s.num_vars, s.num_cons
        ci, vj = s.edge_index[0], s.edge_index[1]
        ne = ci.shape[0]
        ones = np.ones(ne)
        self.ci, self.vj = ci, vj
        self.to_con = sp.csr_matrix((ones, (ci, np.arange(ne))), shape=(m, ne))
        self.to_var = sp.csr_matrix((ones, (vj, np.arange(ne))), shape=(n, ne))


def _check(model: GnnModel, s: BipartiteState):
    if s.var_feats.shape[1] != model.d or s.con_feats.shape[1] != model.q or s.edge_feats.shape[1] != model.e:
        raise ValueError(
            f"state dims (d={s.var_feats.shape[1]}, q={s.con_feats.shape[1]}, e={s.edge_feats.shape[1]}) "
            f"do not match model (d={model.d}, q={model.q}, e={model.e})"
        )
    if s.num_vars == 0:
        raise ValueError("graph has no variable nodes")


def _forward(model: GnnModel, s: BipartiteState, graph: Optional[_Graph] = None):
    _check(model, s)
    P = model.params
    g = graph or _Graph(s)
    V, C, E = s.var_feats, s.con_feats, s.edge_feats
    c = {"g": g}
    c["av1"] = V @ P["v1_w"] + P["v1_b"]
    c["hv1"] = relu(c["av1"])
    c["av2"] = c["hv1"] @ P["v2_w"] + P["v2_b"]
    hv = c["hv"] = relu(c["av2"])
    c["ac1"] = C @ P["c1_w"] + P["c1_b"]
    c["hc1"] = relu(c["ac1"])
    c["ac2"] = c["hc1"] @ P["c2_w"] + P["c2_b"]
    hc = c["hc"] = relu(c["ac2"])

    c["pg1"] = (hc @ P["g1_t"])[g.ci] + (hv @ P["g1_s"])[g.vj] + E @ P["g1_e"] + P["g1_b"]
    m1 = relu(c["pg1"])
    c["agg_c"] = g.to_con @ m1
    c["pf1"] = hc @ P["f1_p"] + c["agg_c"] @ P["f1_a"] + P["f1_b"]
    hc2 = c["hc2"] = relu(c["pf1"])

    c["pg2"] = (hv @ P["g2_t"])[g.vj] + (hc2 @ P["g2_s"])[g.ci] + E @ P["g2_e"] + P["g2_b"]
    m2 = relu(c["pg2"])
    c["agg_v"] = g.to_var @ m2
    c["pf2"] = hv @ P["f2_p"] + c["agg_v"] @ P["f2_a"] + P["f2_b"]
    hv2 = c["hv2"] = relu(c["pf2"])

    c["po1"] = hv2 @ P["o1_w"] + P["o1_b"]
    c["ho"] = relu(c["po1"])
    out = c["ho"] @ P["o2_w"] + P["o2_b"]
    z = float(out.mean())
    # keep the output strictly inside (0, 1) even where the sigmoid saturates
    c["phi"] = min(max(sigmoid(z), _EPS), 1.0 - _EPS)
    return c["phi"], c


def gnn_forward(model: GnnModel, s: BipartiteState) -> float:
    """Predicted ratio in (0, 1)."""
    return _forward(model, s)[0]


def gnn_backward(model: GnnModel, s: BipartiteState, loss_grad: float, cache=None) -> dict:
    """Gradients of ``loss_grad * phi`` with respect to every parameter."""
    if cache is None:
        _, cache = _forward(model, s)
    P, c, g = model.params, cache, cache["g"]
    V, C, E = s.var_feats, s.con_feats, s.edge_feats
    n = V.shape[0]
    G = {}
    phi = c["phi"]
    dz = loss_grad * phi * (1.0 - phi)
    dout = np.full((n, 1), dz / n)
    G["o2_w"] = c["ho"].T @ dout
    G["o2_b"] = dout.sum(axis=0)
    dpo1 = (dout @ P["o2_w"].T) * (c["po1"] > 0)
    G["o1_w"] = c["hv2"].T @ dpo1
    G["o1_b"] = dpo1.sum(axis=0)
    dpf2 = (dpo1 @ P["o1_w"].T) * (c["pf2"] > 0)

    # con -> var half-layer
    G["f2_p"] = c["hv"].T @ dpf2
    G["f2_a"] = c["agg_v"].T @ dpf2
    G["f2_b"] = dpf2.sum(axis=0)
    dhv = dpf2 @ P["f2_p"].T
    dpg2 = (g.to_var.T @ (dpf2 @ P["f2_a"].T)) * (c["pg2"] > 0)
    per_var = g.to_var @ dpg2
    per_con = g.to_con @ dpg2
    G["g2_t"] = c["hv"].T @ per_var
    G["g2_s"] = c["hc2"].T @ per_con
    G["g2_e"] = E.T @ dpg2
    G["g2_b"] = dpg2.sum(axis=0)
    dhv += per_var @ P["g2_t"].T
    dpf1 = (per_con @ P["g2_s"].T) * (c["pf1"] > 0)

    # var -> con half-layer
    G["f1_p"] = c["hc"].T @ dpf1
    G["f1_a"] = c["agg_c"].T @ dpf1
    G["f1_b"] = dpf1.sum(axis=0)
    dhc = dpf1 @ P["f1_p"].T
    dpg1 = (g.to_con.T @ (dpf1 @ P["f1_a"].T)) * (c["pg1"] > 0)
    per_con = g.to_con @ dpg1
    per_var = g.to_var @ dpg1
    G["g1_t"] = c["hc"].T @ per_con
    G["g1_s"] = c["hv"].T @ per_var
    G["g1_e"] = E.T @ dpg1
    G["g1_b"] = dpg1.sum(axis=0)
    dhc += per_con @ P["g1_t"].T
    dhv += per_var @ P["g1_s"].T

    # input MLPs
    dav2 = dhv * (c["av2"] > 0)
    G["v2_w"] = c["hv1"].T @ dav2
    G["v2_b"] = dav2.sum(axis=0)
    dav1 = (dav2 @ P["v2_w"].T) * (c["av1"] > 0)
    G["v1_w"] = V.T @ dav1
    G["v1_b"] = dav1.sum(axis=0)
    dac2 = dhc * (c["ac2"] > 0)
    G["c2_w"] = c["hc1"].T @ dac2
    G["c2_b"] = dac2.sum(axis=0)
    dac1 = (dac2 @ P["c2_w"].T) * (c["ac1"] > 0)
    G["c1_w"] = C.T @ dac1
    G["c1_b"] = dac1.sum(axis=0)
    return {k: np.asarray(G[k]).reshape(P[k].shape) for k in P}


def forward_and_grad(model: GnnModel, s: BipartiteState, target: float, graph: Optional[_Graph] = None):
    """Squared error ``(phi - target)^2`` and its parameter gradients."""
    phi, cache = _forward(model, s, graph)
    err = phi - target
    return phi, err * err, gnn_backward(model, s, 2.0 * err, cache)
