"""Bounded-variable revised simplex (primal and dual).

The LP is held in row-activity form: every row ``i`` gets a logical
variable ``r_i = a_i x`` so the equality system is ``[A, -I] z = 0`` and all
constraint information lives in the bounds of ``z = (x, r)``.

Two loops share one basis representation (explicit inverse with product
updates, refactorized periodically):

* dual simplex, used whenever the starting basis is dual feasible; this is
  the case for the slack basis of a fully boxed LP and for a parent basis
  after branching bound changes.  Its objective is a valid lower bound at
  every iteration, so solves stop early once an objective cutoff is passed.
* primal simplex with a sum-of-infeasibilities phase 1, which starts from
  any basis and is the fallback for everything else.

Both use largest-violation / Dantzig choices until a run of degenerate
pivots is detected and then switch to smallest-index (Bland) choices until
the next non-degenerate step.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import MilpInstance

BASIC, AT_LB, AT_UB, FREE = 0, 1, 2, 3

PRIMAL_TOL = 1e-9
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9
DEGENERATE_RUN = 50
REFACTOR_EVERY = 100
MAX_REPAIRS = 3


class LpNumericalError(ArithmeticError):
    """Basis factorization failed even after repair attempts."""


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    CUTOFF = "cutoff"
    ITERATION_LIMIT = "iteration_limit"


@dataclass
class Basis:
    head: np.ndarray
    status: np.ndarray

    def copy(self) -> "Basis":
        return Basis(self.head.copy(), self.status.copy())

    def with_rows(self, extra: int) -> "Basis":
        """Basis for the same LP with ``extra`` rows appended; their slacks enter basic."""
        size = self.status.shape[0]
        head = np.concatenate([self.head, np.arange(size, size + extra)])
        status = np.concatenate([self.status, np.full(extra, BASIC, dtype=self.status.dtype)])
        return Basis(head, status)


@dataclass
class LpResult:
    status: LpStatus
    x: Optional[np.ndarray]
    obj: float
    iterations: int = 0
    basis: Optional[Basis] = None


class _Restart(Exception):
    pass


class BoundedSimplex:
    """Reusable LP engine for a fixed matrix; bounds vary per solve."""

    def __init__(self, A: np.ndarray, row_lo: np.ndarray, row_hi: np.ndarray, c: np.ndarray):
        A = np.asarray(A, dtype=float)
        self.m, self.n = A.shape
        self.A = A
        self.M = np.hstack([A, -np.eye(self.m)])
        self.cost = np.concatenate([np.asarray(c, dtype=float), np.zeros(self.m)])
        self.row_lo = np.asarray(row_lo, dtype=float)
        self.row_hi = np.asarray(row_hi, dtype=float)

    @classmethod
    def for_instance(cls, inst: MilpInstance) -> "BoundedSimplex":
        lo, hi = inst.row_bounds()
        return cls(inst.A.toarray(), lo, hi, inst.c)

    # -- public entry -------------------------------------------------------

    def solve(
        self,
        lb,
        ub,
        basis: Optional[Basis] = None,
        cutoff: float = np.inf,
        max_iter: Optional[int] = None,
    ) -> LpResult:
        """Solve with the given structural bounds.

        ``cutoff`` lets the dual loop stop with status CUTOFF as soon as its
        bound reaches the value; the primal loop ignores it.
        """
        n, m = self.n, self.m
        L = np.concatenate([np.asarray(lb, dtype=float), self.row_lo])
        U = np.concatenate([np.asarray(ub, dtype=float), self.row_hi])
        if (L > U + PRIMAL_TOL).any():
            return LpResult(LpStatus.INFEASIBLE, None, np.inf)
        if max_iter is None:
            max_iter = 50 * (n + m) + 1000
        self._L, self._U = L, U
        self._repairs = 0
        self._it = 0

        if basis is not None and (basis.head.shape != (m,) or basis.status.shape != (n + m,)):
            raise ValueError("basis does not match the LP dimensions")
        if basis is None:
            head, status = self._slack_basis(dual_friendly=True)
        else:
            head, status = basis.head.copy(), basis.status.copy()
            for j in np.flatnonzero(status != BASIC):
                s = status[j]
                if (s == AT_LB and not np.isfinite(L[j])) or (s == AT_UB and not np.isfinite(U[j])) or s == FREE:
                    status[j] = self._resting_status(j)
        self._head, self._status = head, status
        self._x = np.zeros(n + m)
        self._refactor(initial=True)

        if self._dual_feasible():
            res = self._dual_loop(cutoff, max_iter)
            if res is not None:
                return res
        return self._primal_loop(max_iter)

    # -- basis handling -----------------------------------------------------

    def _resting_status(self, j, prefer_upper=False):
        L, U = self._L, self._U
        lo_ok, hi_ok = np.isfinite(L[j]), np.isfinite(U[j])
        if prefer_upper and hi_ok:
            return AT_UB
        if lo_ok:
            return AT_LB
        if hi_ok:
            return AT_UB
        return FREE

    def _slack_basis(self, dual_friendly=False):
        n, m = self.n, self.m
        head = np.arange(n, n + m)
        status = np.full(n + m, BASIC, dtype=np.int8)
        for j in range(n):
            status[j] = self._resting_status(j, prefer_upper=dual_friendly and self.cost[j] < 0)
        return head, status

    def _place_nonbasic(self):
        x, status = self._x, self._status
        x[:] = 0.0
        at_lb = status == AT_LB
        at_ub = status == AT_UB
        x[at_lb] = self._L[at_lb]
        x[at_ub] = self._U[at_ub]

    def _factor(self, head):
        B = self.M[:, head]
        try:
            Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return None
        if not np.isfinite(Binv).all():
            return None
        if self.m and np.abs(Binv @ B - np.eye(self.m)).max() > 1e-6:
            return None
        return Binv

    def _refactor(self, initial=False):
        """Recompute the basis inverse and basic values; repair a singular basis."""
        if initial:
            self._place_nonbasic()
        Binv = self._factor(self._head)
        repaired = False
        while Binv is None:
            self._repairs += 1
            if self._repairs > MAX_REPAIRS:
                raise LpNumericalError("basis factorization failed after repairs")
            self._head, self._status = self._slack_basis()
            self._place_nonbasic()
            Binv = self._factor(self._head)
            repaired = True
        self._Binv = Binv
        xb = self._x.copy()
        xb[self._head] = 0.0
        self._x[self._head] = -Binv @ (self.M @ xb)
        self._since_refactor = 0
        if repaired and not initial:
            raise _Restart()

    def _reduced_costs(self):
        cB = self.cost[self._head]
        d = self.cost - (cB @ self._Binv) @ self.M
        d[self._head] = 0.0
        return d

    def _dual_feasible(self):
        d = self._reduced_costs()
        s = self._status
        movable = self._U > self._L
        bad = (
            ((s == AT_LB) & movable & (d < -DUAL_TOL))
            | ((s == AT_UB) & movable & (d > DUAL_TOL))
            | ((s == FREE) & (np.abs(d) > DUAL_TOL))
        )
        return not bad.any()

    def _pivot(self, r, q, alpha):
        piv_row = self._Binv[r] / alpha[r]
        self._Binv -= np.outer(alpha, piv_row)
        self._Binv[r] = piv_row
        self._head[r] = q
        self._status[q] = BASIC
        self._since_refactor += 1

    def _optimal(self):
        n = self.n
        xs = self._x[:n].copy()
        return LpResult(
            LpStatus.OPTIMAL, xs, float(self.cost[:n] @ xs), self._it, Basis(self._head.copy(), self._status.copy())
        )

    # -- dual simplex -------------------------------------------------------

    def _dual_loop(self, cutoff, max_iter):
        M, L, U = self.M, self._L, self._U
        degenerate_run = 0
        bland = False
        d = None
        try:
            while True:
                if self._it >= max_iter:
                    return LpResult(LpStatus.ITERATION_LIMIT, None, np.inf, self._it)
                if self._since_refactor >= REFACTOR_EVERY:
                    self._refactor()
                    d = None
                if d is None:
                    d = self._reduced_costs()
                head, status, x = self._head, self._status, self._x
                xB, lB, uB = x[head], L[head], U[head]
                viol = np.maximum(lB - xB, xB - uB)
                infeas = viol > PRIMAL_TOL
                if not infeas.any():
                    return self._optimal()
                obj = float(self.cost @ x)
                if obj >= cutoff:
                    return LpResult(LpStatus.CUTOFF, None, obj, self._it)
                if bland:
                    rows = np.flatnonzero(infeas)
                    r = int(rows[np.argmin(head[rows])])
                else:
                    r = int(np.argmax(np.where(infeas, viol, -1.0)))
                to_lower = xB[r] < lB[r]
                delta = xB[r] - (lB[r] if to_lower else uB[r])

                rho = self._Binv[r]
                alpha_r = np.concatenate([rho @ self.A, -rho])
                tilde = -alpha_r if to_lower else alpha_r
                movable = U > L
                cand = (
                    ((status == AT_LB) & movable & (tilde > PIVOT_TOL))
                    | ((status == AT_UB) & movable & (tilde < -PIVOT_TOL))
                    | ((status == FREE) & (np.abs(tilde) > PIVOT_TOL))
                )
                if not cand.any():
                    return LpResult(LpStatus.INFEASIBLE, None, np.inf, self._it)
                idx = np.flatnonzero(cand)
                ratios = np.abs(d[idx]) / np.abs(tilde[idx])
                best = ratios.min()
                ties = idx[ratios <= best + 1e-12]
                if bland:
                    q = int(ties[0])
                else:
                    q = int(ties[np.argmax(np.abs(alpha_r[ties]))])

                alpha_q = self._Binv @ M[:, q]
                theta_d = d[q] / alpha_r[q]
                d -= theta_d * alpha_r
                d[q] = 0.0
                theta_p = delta / alpha_q[r]
                x[head] -= theta_p * alpha_q
                x[q] += theta_p
                leaving = head[r]
                status[leaving] = AT_LB if to_lower else AT_UB
                x[leaving] = L[leaving] if to_lower else U[leaving]
                self._pivot(r, q, alpha_q)
                self._it += 1

                if best <= 1e-12:
                    degenerate_run += 1
                    if degenerate_run > DEGENERATE_RUN:
                        bland = True
                else:
                    degenerate_run = 0
                    bland = False
        except _Restart:
            return None

    # -- primal simplex -----------------------------------------------------

    def _primal_loop(self, max_iter):
        n, m = self.n, self.m
        M, L, U = self.M, self._L, self._U
        finite_L = np.isfinite(L)
        finite_U = np.isfinite(U)
        movable = U > L
        degenerate_run = 0
        bland = False
        while True:
            if self._it >= max_iter:
                return LpResult(LpStatus.ITERATION_LIMIT, None, np.inf, self._it)
            if self._since_refactor >= REFACTOR_EVERY:
                try:
                    self._refactor()
                except _Restart:
                    pass
            head, status, x, Binv = self._head, self._status, self._x, self._Binv
            xB, lB, uB = x[head], L[head], U[head]
            below = xB < lB - PRIMAL_TOL
            above = xB > uB + PRIMAL_TOL
            phase1 = bool(below.any() or above.any())
            if phase1:
                cB = above.astype(float) - below.astype(float)
                d = -(cB @ Binv) @ M
                d[head] = 0.0
            else:
                d = self._reduced_costs()

            nonbasic = status != BASIC
            free = status == FREE
            inc = nonbasic & (d < -DUAL_TOL) & (((status == AT_LB) & movable) | free)
            dec = nonbasic & (d > DUAL_TOL) & (((status == AT_UB) & movable) | free)
            cand = inc | dec
            if not cand.any():
                if phase1:
                    return LpResult(LpStatus.INFEASIBLE, None, np.inf, self._it)
                return self._optimal()

            if bland:
                j = int(np.flatnonzero(cand)[0])
            else:
                j = int(np.argmax(np.where(cand, np.abs(d), -1.0)))
            dirn = 1.0 if inc[j] else -1.0
            alpha = Binv @ M[:, j]
            rate = -dirn * alpha

            lim = np.full(m, np.inf)
            leave_at = np.zeros(m, dtype=np.int8)
            active = np.abs(rate) > PIVOT_TOL
            down = active & (rate < 0)
            up = active & (rate > 0)
            inside = ~below & ~above
            with np.errstate(divide="ignore", invalid="ignore"):
                sel = down & above
                lim[sel] = (xB[sel] - uB[sel]) / -rate[sel]
                leave_at[sel] = AT_UB
                sel = down & inside & finite_L[head]
                lim[sel] = np.maximum(xB[sel] - lB[sel], 0.0) / -rate[sel]
                leave_at[sel] = AT_LB
                sel = up & below
                lim[sel] = (lB[sel] - xB[sel]) / rate[sel]
                leave_at[sel] = AT_LB
                sel = up & inside & finite_U[head]
                lim[sel] = np.maximum(uB[sel] - xB[sel], 0.0) / rate[sel]
                leave_at[sel] = AT_UB

            theta_flip = U[j] - L[j] if (finite_L[j] and finite_U[j]) else np.inf
            theta_row = lim.min() if m else np.inf
            if not np.isfinite(theta_row) and not np.isfinite(theta_flip):
                if phase1:
                    raise LpNumericalError("phase 1 ray without blocking variable")
                return LpResult(LpStatus.UNBOUNDED, None, -np.inf, self._it)

            self._it += 1
            if theta_flip <= theta_row:
                theta = theta_flip
                x[head] += theta * rate
                status[j] = AT_UB if dirn > 0 else AT_LB
                x[j] = U[j] if dirn > 0 else L[j]
            else:
                theta = theta_row
                ties = np.flatnonzero(lim <= theta_row + 1e-12)
                if bland:
                    r = int(ties[np.argmin(head[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(alpha[ties]))])
                x[j] += dirn * theta
                x[head] += theta * rate
                leaving = head[r]
                status[leaving] = leave_at[r]
                x[leaving] = L[leaving] if leave_at[r] == AT_LB else U[leaving]
                self._pivot(r, j, alpha)

            if theta <= 1e-12:
                degenerate_run += 1
                if degenerate_run > DEGENERATE_RUN:
                    bland = True
            else:
                degenerate_run = 0
                bland = False


def solve_lp_relaxation(inst: MilpInstance) -> LpResult:
    """Optimal basic solution of the continuous relaxation of ``inst``."""
    engine = BoundedSimplex.for_instance(inst)
    res = engine.solve(inst.lb, inst.ub)
    if res.status == LpStatus.OPTIMAL:
        res.obj += inst.obj_offset
    return res
