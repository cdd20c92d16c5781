# causal_friendliness/core/simplex.py
"""Dense two-phase tableau simplex for small equality-form LPs.

    minimize c·x  subject to  A x = b,  x >= 0

Bland's rule on both entering and leaving choices keeps it from cycling.
When Phase 1 ends with positive residual the Phase-1 duals form a Farkas
certificate y with Aᵀy <= 0 and b·y > 0.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11: equivalent of the stdlib StrEnum
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from typing import List, Optional, Tuple

import numpy as np

log = logging.getLogger(__name__)


class LPStatus(StrEnum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    phase1_residual: float = 0.0
    farkas: Optional[np.ndarray] = None
    iterations: int = 0


class TwoPhaseSimplex:
    def __init__(self, pivot_tol: float = 1e-11, feasibility_tol: float = 1e-9, max_iter: int = 10_000):
        self.pivot_tol = pivot_tol
        self.feasibility_tol = feasibility_tol
        self.max_iter = max_iter
        self._iterations = 0

    # ------------------- tableau mechanics -------------------

    @staticmethod
    def _pivot(T: np.ndarray, row: int, col: int) -> None:
        T[row, :] /= T[row, col]
        for r in range(T.shape[0]):
            if r != row and T[r, col] != 0.0:
                T[r, :] -= T[r, col] * T[row, :]

    def _enter(self, cost_row: np.ndarray, allowed: int) -> int:
        # Bland: lowest-index column with negative reduced cost
        neg = np.flatnonzero(cost_row[:allowed] < -self.pivot_tol)
        return int(neg[0]) if neg.size else -1

    def _leave(self, T: np.ndarray, col: int, basis: List[int]) -> int:
        best: Optional[Tuple[float, int, int]] = None
        for i in range(T.shape[0] - 1):
            a = T[i, col]
            if a > self.pivot_tol:
                key = (T[i, -1] / a, basis[i], i)
                if best is None or key[:2] < best[:2]:
                    best = key
        return -1 if best is None else best[2]

    def _run(self, T: np.ndarray, basis: List[int], allowed: int) -> LPStatus:
        while self._iterations < self.max_iter:
            col = self._enter(T[-1, :-1], allowed)
            if col == -1:
                return LPStatus.OPTIMAL
            row = self._leave(T, col, basis)
            if row == -1:
                return LPStatus.UNBOUNDED
            self._pivot(T, row, col)
            basis[row] = col
            self._iterations += 1
        return LPStatus.ITERATION_LIMIT

    # ------------------- solve -------------------

    def solve(self, c, A, b) -> LPResult:
        c = np.asarray(c, dtype=float)
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float)
        m, n = A.shape
        if c.shape != (n,) or b.shape != (m,):
            raise ValueError(f"inconsistent LP shapes: c {c.shape}, A {A.shape}, b {b.shape}")
        self._iterations = 0

        # b >= 0 so the artificial basis starts feasible
        flip = np.where(b < 0, -1.0, 1.0)
        A1, b1 = A * flip[:, None], b * flip

        # Phase 1: minimize the sum of artificials; cost row holds reduced costs, corner holds -z
        T = np.zeros((m + 1, n + m + 1))
        T[:m, :n] = A1
        T[:m, n:n + m] = np.eye(m)
        T[:m, -1] = b1
        T[-1, :n] = -A1.sum(axis=0)
        T[-1, -1] = -b1.sum()
        basis = list(range(n, n + m))

        status = self._run(T, basis, allowed=n + m)
        if status is not LPStatus.OPTIMAL:
            return LPResult(status=status, iterations=self._iterations)
        residual = max(-float(T[-1, -1]), 0.0)
        if residual > self.feasibility_tol:
            # artificial column i has cost 1 and column e_i, so its reduced cost is 1 - y_i
            y = (1.0 - T[-1, n:n + m]) * flip
            log.debug("phase 1 infeasible, residual %.3e after %d pivots", residual, self._iterations)
            return LPResult(status=LPStatus.INFEASIBLE, phase1_residual=residual, farkas=y,
                            iterations=self._iterations)

        # drive artificials out of the basis; rows where that is impossible are redundant
        keep_rows = []
        for i in range(m):
            if basis[i] >= n:
                cols = np.flatnonzero(np.abs(T[i, :n]) > self.pivot_tol)
                if cols.size == 0:
                    continue
                self._pivot(T, i, int(cols[0]))
                basis[i] = int(cols[0])
            keep_rows.append(i)

        T2 = np.zeros((len(keep_rows) + 1, n + 1))
        T2[:-1, :n] = T[keep_rows, :n]
        T2[:-1, -1] = T[keep_rows, -1]
        basis2 = [basis[i] for i in keep_rows]

        # Phase 2 reduced costs: c - c_B B⁻¹ A
        T2[-1, :n] = c
        for r, j in enumerate(basis2):
            if c[j] != 0.0:
                T2[-1, :] -= c[j] * T2[r, :]

        status = self._run(T2, basis2, allowed=n)
        if status is not LPStatus.OPTIMAL:
            return LPResult(status=status, phase1_residual=residual, iterations=self._iterations)

        x = np.zeros(n)
        for r, j in enumerate(basis2):
            x[j] = T2[r, -1]
        x = np.where(x < 0, 0.0, x)
        return LPResult(status=LPStatus.OPTIMAL, x=x, objective=float(c @ x),
                        phase1_residual=residual, iterations=self._iterations)
