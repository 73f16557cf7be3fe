"""Hamming-distance constraints around a binary reference solution."""

from __future__ import annotations

import math
from typing import Union

import numpy as np
import scipy.sparse as sp

from ..milp.model import Assignment, MilpInstance, ModelError

SYMMETRIC = "symmetric"
ASYMMETRIC = "asymmetric"
FORMS = (SYMMETRIC, ASYMMETRIC)
LEFT = "left_leq"
RIGHT = "right_geq"

# slack when flooring a real-valued k, so that 20/k' * k' still gives 20
K_FLOOR_TOL = 1e-9

Reference = Union[Assignment, np.ndarray]


def _ref_values(x_ref: Reference) -> np.ndarray:
    return np.asarray(x_ref.values if isinstance(x_ref, Assignment) else x_ref, dtype=float)


def _check_form(form: str):
    if form not in FORMS:
        raise ModelError(f"unknown constraint form {form!r}")


def floor_k(k: float) -> int:
    return int(math.floor(k + K_FLOOR_TOL))


def distance_terms(inst: MilpInstance, x_ref: Reference, form: str = SYMMETRIC) -> tuple[np.ndarray, float]:
    """Return ``(coef, const)`` with ``Delta(x, x_ref) = coef @ x + const``.

    ``coef`` is dense over all variables and zero off the binaries.
    """
    _check_form(form)
    ref = _ref_values(x_ref)
    if ref.shape != (inst.num_vars,):
        raise ModelError(f"reference has shape {ref.shape}, expected ({inst.num_vars},)")
    coef = np.zeros(inst.num_vars)
    bins = inst.binary_idx
    on = bins[ref[bins] > 0.5]
    coef[on] = -1.0
    if form == SYMMETRIC:
        coef[bins[ref[bins] <= 0.5]] = 1.0
    return coef, float(on.size)


def hamming_delta(x, x_ref: Reference, form: str = SYMMETRIC, inst: MilpInstance | None = None) -> float:
    """Local branching distance of ``x`` from the reference solution.

    Without ``inst`` every coordinate is treated as binary.  ``x`` may be
    fractional (e.g. an LP optimum).
    """
    _check_form(form)
    x = np.asarray(x, dtype=float)
    ref = _ref_values(x_ref)
    if x.shape != ref.shape:
        raise ModelError(f"dimension mismatch: {x.shape} vs {ref.shape}")
    if inst is not None:
        if x.shape != (inst.num_vars,):
            raise ModelError("vectors do not match the instance")
        bins = inst.binary_idx
        x, ref = x[bins], ref[bins]
    support = ref > 0.5
    away = float(np.sum(1.0 - x[support]))
    if form == ASYMMETRIC:
        return away
    return float(np.sum(x[~support])) + away


def add_lb_constraint(
    inst: MilpInstance,
    x_ref: Reference,
    k: float,
    direction: str = LEFT,
    form: str = SYMMETRIC,
) -> MilpInstance:
    """Copy of ``inst`` with ``Delta <= floor(k)`` (left) or ``Delta >= floor(k) + 1`` (right)."""
    return inst.with_rows(*lb_rows(inst, [(x_ref, k, direction)], form))


def lb_rows(inst: MilpInstance, specs, form: str = SYMMETRIC):
    """Rows, senses and right-hand sides for several ``(x_ref, k, direction)`` triples."""
    rows, senses, rhs, names = [], [], [], []
    for x_ref, k, direction in specs:
        if k < 1 - K_FLOOR_TOL:
            raise ModelError(f"neighborhood size must be at least 1, got {k}")
        coef, const = distance_terms(inst, x_ref, form)
        kk = floor_k(k)
        rows.append(coef)
        if direction == LEFT:
            senses.append("L")
            rhs.append(kk - const)
        elif direction == RIGHT:
            senses.append("G")
            rhs.append(kk + 1 - const)
        else:
            raise ModelError(f"unknown direction {direction!r}")
        names.append(f"lb_{direction}_{len(names)}")
    mat = sp.csr_matrix(np.vstack(rows)) if rows else sp.csr_matrix((0, inst.num_vars))
    return mat, senses, rhs, names


def k_max(inst: MilpInstance, x_ref: Reference, form: str = SYMMETRIC) -> int:
    """Largest useful neighborhood size: |B| (symmetric) or |support| (asymmetric)."""
    if form == SYMMETRIC:
        return max(1, int(inst.binary_idx.size))
    ref = _ref_values(x_ref)
    return max(1, int(np.sum(ref[inst.binary_idx] > 0.5)))
