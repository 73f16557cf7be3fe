"""Reader and writer for the common MPS subset.

Supported sections: NAME, OBJSENSE, ROWS, COLUMNS (with INTORG/INTEND
markers), RHS, RANGES, BOUNDS, ENDATA.  Records are split on whitespace, so
fixed-format files work as long as names contain no blanks.  Ranged rows
are expanded into a ``>=`` and a ``<=`` row.
"""

from __future__ import annotations

import os
from typing import Union

import numpy as np
import scipy.sparse as sp

from .model import BINARY, CONTINUOUS, INTEGER, MilpInstance

PathLike = Union[str, "os.PathLike[str]"]



class MpsError(ValueError):
    def __init__(self, msg: str, line: int = 0):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


def read_mps(path: PathLike) -> MilpInstance:
    name = os.path.splitext(os.path.basename(str(path)))[0]
    with open(path) as fh:
        return parse_mps(fh.read(), default_name=name)


def parse_mps(text: str, default_name: str = "milp") -> MilpInstance:
    name = default_name
    maximize = False
    obj_row = None
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    row_pos: dict[str, int] = {}
    col_index: dict[str, int] = {}
    col_names: list[str] = []
    col_int: list[bool] = []
    obj: dict[int, float] = {}
    entries: dict[tuple[int, int], float] = {}
    rhs: dict[str, float] = {}
    ranges: dict[str, float] = {}
    bounds: list[tuple[int, str, float, int]] = []
    obj_rhs = 0.0
    section = None
    in_int = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line or line.lstrip().startswith("*"):
            continue
        fields = line.split()
        if not raw[0].isspace():
            head = fields[0].upper()
            if head == "NAME":
                section = "NAME"
                if len(fields) > 1:
                    name = fields[1]
                continue
            if head == "OBJSENSE":
                section = "OBJSENSE"
                if len(fields) > 1:
                    maximize = _objsense(fields[1], lineno)
                    section = None
                continue
            if head == "ENDATA":
                section = "ENDATA"
                break
            if head in ("ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS"):
                section = head
                continue
            if head.isupper():
                raise MpsError(f"unsupported section {head!r}", lineno)

        if section == "OBJSENSE":
            maximize = _objsense(fields[0], lineno)
        elif section == "ROWS":
            if len(fields) != 2:
                raise MpsError("ROWS record needs a type and a name", lineno)
            kind, rname = fields[0].upper(), fields[1]
            if kind == "N":
                if obj_row is None:
                    obj_row = rname
                continue
            if kind not in ("L", "G", "E"):
                raise MpsError(f"unknown row type {kind!r}", lineno)
            if rname in row_sense:
                raise MpsError(f"duplicate row {rname!r}", lineno)
            row_sense[rname] = kind
            row_pos[rname] = len(row_order)
            row_order.append(rname)
        elif section == "COLUMNS":
            if len(fields) >= 3 and fields[1].strip("'").upper() == "MARKER":
                marker = fields[2].strip("'").upper()
                if marker == "INTORG":
                    in_int = True
                elif marker == "INTEND":
                    in_int = False
                else:
                    raise MpsError(f"unknown marker {marker!r}", lineno)
                continue
            if len(fields) not in (3, 5):
                raise MpsError("COLUMNS record needs 3 or 5 fields", lineno)
            cname = fields[0]
            if cname not in col_index:
                col_index[cname] = len(col_names)
                col_names.append(cname)
                col_int.append(in_int)
            j = col_index[cname]
            for rname, sval in zip(fields[1::2], fields[2::2]):
                val = _number(sval, lineno)
                if rname == obj_row:
                    obj[j] = obj.get(j, 0.0) + val
                elif rname in row_sense:
                    key = (row_pos[rname], j)
                    if key in entries:
                        raise MpsError(f"duplicate entry ({rname}, {cname})", lineno)
                    entries[key] = val
                else:
                    raise MpsError(f"unknown row {rname!r}", lineno)
        elif section in ("RHS", "RANGES"):
            pairs = fields[1:] if len(fields) % 2 == 1 else fields
            if len(pairs) not in (2, 4):
                raise MpsError(f"{section} record needs 2 or 4 value fields", lineno)
            for rname, sval in zip(pairs[0::2], pairs[1::2]):
                val = _number(sval, lineno)
                if section == "RHS" and rname == obj_row:
                    obj_rhs = val
                elif rname in row_sense:
                    (rhs if section == "RHS" else ranges)[rname] = val
                else:
                    raise MpsError(f"unknown row {rname!r}", lineno)
        elif section == "BOUNDS":
            if len(fields) < 3:
                raise MpsError("BOUNDS record too short", lineno)
            btype = fields[0].upper()
            if btype in ("FR", "MI", "PL", "BV"):
                cname = fields[2] if len(fields) >= 3 else fields[1]
                val = 0.0
            else:
                if len(fields) < 4:
                    raise MpsError(f"bound {btype} needs a value", lineno)
                cname, val = fields[2], _number(fields[3], lineno)
            if cname not in col_index:
                raise MpsError(f"unknown column {cname!r}", lineno)
            bounds.append((col_index[cname], btype, val, lineno))
        elif section == "NAME":
            continue
        else:
            raise MpsError("record outside of a section", lineno)

    if section != "ENDATA":
        raise MpsError("missing ENDATA")

    n = len(col_names)
    kind = np.where(np.asarray(col_int, dtype=bool), INTEGER, CONTINUOUS).astype(np.int8) if n else np.zeros(0, np.int8)
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    for j, btype, val, lineno in bounds:
        if btype == "UP":
            ub[j] = val
            if val < 0 and lb[j] == 0:
                lb[j] = -np.inf
        elif btype == "LO":
            lb[j] = val
        elif btype == "FX":
            lb[j] = ub[j] = val
        elif btype == "FR":
            lb[j], ub[j] = -np.inf, np.inf
        elif btype == "MI":
            lb[j] = -np.inf
        elif btype == "PL":
            ub[j] = np.inf
        elif btype == "BV":
            kind[j] = INTEGER
            lb[j], ub[j] = 0.0, 1.0
        elif btype == "LI":
            kind[j] = INTEGER
            lb[j] = val
        elif btype == "UI":
            kind[j] = INTEGER
            ub[j] = val
        else:
            raise MpsError(f"unsupported bound type {btype!r}", lineno)
    kind[(kind == INTEGER) & (lb == 0) & (ub == 1)] = BINARY

    rows, cols, vals, senses, b, rnames = [], [], [], [], [], []
    for rname in row_order:
        sense = row_sense[rname]
        r = rhs.get(rname, 0.0)
        pieces = [(sense, r)]
        if rname in ranges:
            R = ranges[rname]
            if sense == "E":
                lo, hi = (r, r + R) if R >= 0 else (r + R, r)
            elif sense == "L":
                lo, hi = r - abs(R), r
            else:
                lo, hi = r, r + abs(R)
            pieces = [("G", lo), ("L", hi)]
        for k, (s, rv) in enumerate(pieces):
            senses.append(s)
            b.append(rv)
            rnames.append(rname if len(pieces) == 1 else f"{rname}_{'lo' if k == 0 else 'hi'}")
    expand = [2 if rname in ranges else 1 for rname in row_order]
    offsets = np.concatenate([[0], np.cumsum(expand)]).astype(int)
    for (i, j), v in entries.items():
        for k in range(expand[i]):
            rows.append(offsets[i] + k)
            cols.append(j)
            vals.append(v)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(senses), n))
    c = np.zeros(n)
    for j, v in obj.items():
        c[j] = v
    return MilpInstance.build(
        c, A, senses, b, kind, lb, ub,
        maximize=maximize, obj_offset=-obj_rhs, name=name,
        var_names=col_names, row_names=rnames,
    )


def _objsense(word, lineno):
    word = word.upper()
    if word in ("MAX", "MAXIMIZE"):
        return True
    if word in ("MIN", "MINIMIZE"):
        return False
    raise MpsError(f"unknown objective sense {word!r}", lineno)


def _number(s, lineno):
    try:
        return float(s)
    except ValueError:
        raise MpsError(f"bad number {s!r}", lineno) from None


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_mps(inst: MilpInstance, path: PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(format_mps(inst))


def format_mps(inst: MilpInstance) -> str:
    n, m = inst.num_vars, inst.num_cons
    cnames = list(inst.var_names) or [f"x{j}" for j in range(n)]
    rnames = list(inst.row_names) or [f"c{i}" for i in range(m)]
    sign = -1.0 if inst.maximize else 1.0
    out = [f"NAME {inst.name}"]
    if inst.maximize:
        out += ["OBJSENSE", "    MAX"]
    out.append("ROWS")
    out.append(" N  obj")
    for i in range(m):
        out.append(f" {inst.senses[i]}  {rnames[i]}")
    out.append("COLUMNS")
    csc = inst.A.tocsc()
    csc.sort_indices()
    in_int = False
    marker = 0
    for j in range(n):
        is_int = inst.var_kind[j] != CONTINUOUS
        if is_int and not in_int:
            out.append(f"    MARKER{marker} 'MARKER' 'INTORG'")
            in_int = True
        elif not is_int and in_int:
            out.append(f"    MARKER{marker} 'MARKER' 'INTEND'")
            marker += 1
            in_int = False
        out.append(f"    {cnames[j]} obj {_fmt(sign * inst.c[j])}")
        lo, hi = csc.indptr[j], csc.indptr[j + 1]
        for i, v in zip(csc.indices[lo:hi], csc.data[lo:hi]):
            out.append(f"    {cnames[j]} {rnames[i]} {_fmt(v)}")
    if in_int:
        out.append(f"    MARKER{marker} 'MARKER' 'INTEND'")
    out.append("RHS")
    offset = sign * inst.obj_offset
    if offset != 0:
        out.append(f"    RHS obj {_fmt(-offset)}")
    for i in range(m):
        if inst.b[i] != 0:
            out.append(f"    RHS {rnames[i]} {_fmt(inst.b[i])}")
    out.append("BOUNDS")
    for j in range(n):
        lo, hi, kind = inst.lb[j], inst.ub[j], inst.var_kind[j]
        name = cnames[j]
        if kind == BINARY:
            out.append(f" BV BND {name}")
            continue
        if lo == hi:
            out.append(f" FX BND {name} {_fmt(lo)}")
            continue
        if lo == -np.inf and hi == np.inf:
            out.append(f" FR BND {name}")
            continue
        if lo == -np.inf:
            out.append(f" MI BND {name}")
        elif lo != 0:
            out.append(f" LO BND {name} {_fmt(lo)}")
        if hi != np.inf:
            out.append(f" UP BND {name} {_fmt(hi)}")
        elif kind == INTEGER:
            out.append(f" PL BND {name}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"
