"""Policy and regression inputs: the bipartite MILP graph and the RL state."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensorio
from .lb.records import LbIterationOutcome, LbRunRecord, LbStatus
from .milp.model import BINARY, CONTINUOUS, GE, INTEGER, Assignment, MilpInstance, ModelError

VAR_COLUMNS = ("coef", "binary", "integer", "imp_integer", "continuous", "has_lb", "has_ub", "lb", "ub", "sol_val")
COMPACT_COLUMNS = ("coef", "binary", "sol_val")
CON_COLUMNS = ("bias",)
EDGE_COLUMNS = ("coef",)
RL_COLUMNS = ("optimal", "infeasible", "improved", "not_improved", "diverse", "t_available", "obj_improve")
BOUND_CLIP = 1e4


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Constraint features (m x q), edges and variable features (n x d)."""

    con_feats: np.ndarray
    edge_index: np.ndarray  # 2 x E, rows (constraint index, variable index)
    edge_feats: np.ndarray  # E x 1
    var_feats: np.ndarray
    var_columns: tuple = VAR_COLUMNS

    @property
    def num_vars(self) -> int:
        return self.var_feats.shape[0]

    @property
    def num_cons(self) -> int:
        return self.con_feats.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.var_feats[:, self.var_columns.index(name)]

    def to_bytes(self, meta: dict | None = None) -> bytes:
        head = {"var_columns": list(self.var_columns), "con_columns": list(CON_COLUMNS), "edge_columns": list(EDGE_COLUMNS)}
        head.update(meta or {})
        return tensorio.encode(
            {"con_feats": self.con_feats, "edge_index": self.edge_index, "edge_feats": self.edge_feats, "var_feats": self.var_feats},
            head,
        )

    @classmethod
    def from_bytes(cls, buf: bytes) -> tuple["BipartiteState", dict]:
        t, meta = tensorio.decode(buf)
        state = cls(t["con_feats"], t["edge_index"], t["edge_feats"], t["var_feats"], tuple(meta["var_columns"]))
        return state, meta


def extract_bipartite(inst: MilpInstance, incumbent, compact: bool = False) -> BipartiteState:
    """Graph features of ``inst`` with the incumbent values attached.

    Rows are put in ``<=`` form (``>=`` rows are negated) and scaled by the
    Euclidean norm of the row with its right-hand side appended.
    ``compact=True`` keeps only the coef, binary and sol_val columns and is
    meant for pure binary models.
    """
    x = np.asarray(incumbent.values if isinstance(incumbent, Assignment) else incumbent, dtype=float)
    if x.shape != (inst.num_vars,):
        raise ModelError(f"incumbent has shape {x.shape}, expected ({inst.num_vars},)")
    A = inst.A.tocoo()
    sign = np.where(inst.senses == GE, -1.0, 1.0)
    b = inst.b * sign
    sq = np.bincount(A.row, weights=A.data**2, minlength=inst.num_cons) + b**2
    norm = np.sqrt(sq)
    norm[norm == 0] = 1.0
    edge = A.data * sign[A.row] / norm[A.row]
    order = np.lexsort((A.col, A.row))
    edge_index = np.vstack([A.row[order], A.col[order]]).astype(np.int64)

    cmax = np.abs(inst.c).max(initial=0.0)
    coef = inst.c / cmax if cmax > 0 else np.zeros(inst.num_vars)
    kind = inst.var_kind
    cols = {
        "coef": coef,
        "binary": (kind == BINARY).astype(float),
        "integer": (kind == INTEGER).astype(float),
        "imp_integer": np.zeros(inst.num_vars),
        "continuous": (kind == CONTINUOUS).astype(float),
        "has_lb": np.isfinite(inst.lb).astype(float),
        "has_ub": np.isfinite(inst.ub).astype(float),
        "lb": np.clip(inst.lb, -BOUND_CLIP, BOUND_CLIP) / BOUND_CLIP,
        "ub": np.clip(inst.ub, -BOUND_CLIP, BOUND_CLIP) / BOUND_CLIP,
        "sol_val": x,
    }
    names = COMPACT_COLUMNS if compact else VAR_COLUMNS
    return BipartiteState(
        con_feats=(b / norm).reshape(-1, 1),
        edge_index=edge_index,
        edge_feats=edge[order].reshape(-1, 1),
        var_feats=np.column_stack([cols[c] for c in names]),
        var_columns=names,
    )


@dataclass(frozen=True)
class RlState:
    optimal: float
    infeasible: float
    improved: float
    not_improved: float
    diverse: float
    t_available: float
    obj_improve: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, c) for c in RL_COLUMNS])

    def as_tuple(self) -> tuple:
        return tuple(float(v) for v in self.as_array())


def extract_rl_state(prev: LbIterationOutcome, record: LbRunRecord, diverse_flag: bool, t_limit: float | None = None) -> RlState:
    """State after the iteration ``prev``; ``t_limit`` defaults to the last iteration's limit."""
    if t_limit is None:
        if not record.iterations:
            raise ValueError("no prior iteration to build a state from")
        t_limit = record.iterations[-1].t
    avail = (t_limit - prev.elapsed) / t_limit if t_limit > 0 else 0.0
    st = prev.status
    return RlState(
        optimal=float(st == LbStatus.OPTIMAL),
        infeasible=float(st == LbStatus.INFEASIBLE),
        improved=float(st == LbStatus.IMPROVED),
        not_improved=float(st == LbStatus.NOT_IMPROVED),
        diverse=float(bool(diverse_flag)),
        t_available=float(np.clip(avail, 0.0, 1.0)),
        obj_improve=float(prev.obj_improvement / max(abs(record.initial_obj), 1.0)),
    )
