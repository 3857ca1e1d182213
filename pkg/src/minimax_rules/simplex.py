"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Sized for desk-scale problems (a few hundred rows/columns).  Pivot order is
fully deterministic: the entering column is the lowest-index column with a
negative reduced cost, the leaving row is the minimum-ratio row with ties
going to the lowest-index basic variable.

Every solve also returns dual values read off the final tableau, so callers
can audit strong duality without a second solve.
"""

from __future__ import annotations

import contextlib
import contextvars
import enum
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import NumericFailure

FEAS_TOL = 1e-9
GAP_TOL = 1e-6


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LpSolution:
    """Outcome of :func:`solve_lp`.

    ``duals_ub``/``duals_eq`` follow the textbook sign convention of the
    stated problem: for a maximisation the inequality duals are >= 0 and
    ``A_ub.T @ y_ub + A_eq.T @ y_eq >= c`` on non-negative variables.
    ``dual_certificate`` is only filled by callers that know the structure
    (see :func:`minimax_rules.robust.inner_max`).
    """

    status: LpStatus
    objective: float
    x: np.ndarray | None = None
    duals_ub: np.ndarray | None = None
    duals_eq: np.ndarray | None = None
    dual_objective: float = float("nan")
    dual_infeasibility: float = float("nan")
    primal_infeasibility: float = float("nan")
    iterations: int = 0
    dual_certificate: tuple[float, np.ndarray] | None = None

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    @property
    def duality_gap(self) -> float:
        return abs(self.objective - self.dual_objective)

    def certified(self, gap_tol: float = GAP_TOL, feas_tol: float = FEAS_TOL) -> bool:
        """Primal feasible, dual feasible and gap within tolerance."""
        if not self.optimal:
            return False
        scale = 1.0 + abs(self.objective)
        return (
            self.duality_gap <= gap_tol * scale
            and self.dual_infeasibility <= gap_tol * scale
            and self.primal_infeasibility <= feas_tol * scale
        )


_recorder: contextvars.ContextVar[list | None] = contextvars.ContextVar("lp_recorder", default=None)


@contextlib.contextmanager
def record_solutions() -> Iterator[list[LpSolution]]:
    """Collect every :class:`LpSolution` produced inside the block."""
    log: list[LpSolution] = []
    token = _recorder.set(log)
    try:
        yield log
    finally:
        _recorder.reset(token)


def _as_2d(A, ncols: int) -> np.ndarray:
    if A is None:
        return np.zeros((0, ncols))
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1) if A.size else np.zeros((0, ncols))
    if A.shape[1] != ncols:
        raise ValueError(f"constraint matrix has {A.shape[1]} columns, expected {ncols}")
    return A


class _Tableau:
    """Canonical form ``min c.z  s.t.  M z = rhs, z >= 0`` with one artificial per row."""

    def __init__(self, M: np.ndarray, rhs: np.ndarray, tol: float, max_iter: int):
        m, n = M.shape
        self.m, self.n = m, n
        self.sign = np.where(rhs < 0, -1.0, 1.0)
        self.T = np.zeros((m, n + m + 1))
        self.T[:, :n] = M * self.sign[:, None]
        self.T[:, n : n + m] = np.eye(m)
        self.T[:, -1] = rhs * self.sign
        self.basis = list(range(n, n + m))
        self.tol = tol
        self.max_iter = max_iter
        self.iterations = 0

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        piv = T[row, col]
        if abs(piv) < 1e-12:
            raise NumericFailure(f"pivot element {piv:.3e} below tolerance")
        T[row] /= piv
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row])
        self.r -= self.r[col] * T[row]
        self.basis[row] = col
        self.iterations += 1

    def set_costs(self, cost: np.ndarray) -> None:
        """Install reduced costs for ``cost`` (length n + m) at the current basis."""
        ext = np.append(cost, 0.0)
        cb = ext[self.basis]
        self.r = ext - cb @ self.T

    def run(self, allowed: int) -> bool:
        """Iterate Bland pivots over columns ``< allowed``; False if unbounded."""
        T, tol = self.T, self.tol
        while True:
            if self.iterations >= self.max_iter:
                raise NumericFailure(f"simplex exceeded {self.max_iter} pivots")
            neg = np.flatnonzero(self.r[:allowed] < -tol)
            if neg.size == 0:
                return True
            col = int(neg[0])
            colv = T[:, col]
            rows = np.flatnonzero(colv > tol)
            if rows.size == 0:
                return False
            ratios = T[rows, -1] / colv[rows]
            best = ratios.min()
            cands = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            row = min(cands, key=lambda i: self.basis[i])
            self.pivot(int(row), col)


def solve_lp(
    c: Sequence[float],
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    bounds: Sequence[tuple[float | None, float | None]] | None = None,
    *,
    maximize: bool = False,
    tol: float = FEAS_TOL,
    max_iter: int = 50_000,
) -> LpSolution:
    """Solve ``min/max c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and bounds.

    ``bounds`` is a per-variable ``(lower, upper)`` list with ``None`` for an
    infinite side; the default is ``x >= 0``.  INFEASIBLE and UNBOUNDED are
    reported through ``status``, never raised.
    """
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    A_ub = _as_2d(A_ub, n)
    A_eq = _as_2d(A_eq, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    if b_ub.size != A_ub.shape[0] or b_eq.size != A_eq.shape[0]:
        raise ValueError("right-hand side length does not match constraint rows")
    for arr in (c, A_ub, A_eq, b_ub, b_eq):
        if not np.all(np.isfinite(arr)):
            raise ValueError("LP data must be finite")
    if bounds is None:
        bounds = [(0.0, None)] * n
    if len(bounds) != n:
        raise ValueError("bounds length does not match objective")

    # x = offset + S z with z >= 0
    cols: list[np.ndarray] = []
    offset = np.zeros(n)
    extra_rows: list[tuple[int, float]] = []  # (z column, upper bound)
    for j, (lo, hi) in enumerate(bounds):
        e = np.zeros(n)
        e[j] = 1.0
        if lo is not None and np.isfinite(lo):
            offset[j] = lo
            cols.append(e)
            if hi is not None and np.isfinite(hi):
                if hi < lo:
                    return _finish(LpSolution(LpStatus.INFEASIBLE, float("nan")))
                extra_rows.append((len(cols) - 1, hi - lo))
        elif hi is not None and np.isfinite(hi):
            offset[j] = hi
            cols.append(-e)
        else:
            cols.append(e)
            cols.append(-e)
    S = np.array(cols).T if cols else np.zeros((n, 0))
    nz = S.shape[1]

    sense = -1.0 if maximize else 1.0
    cz = sense * (c @ S)
    const = sense * (c @ offset)

    n_user_ub = A_ub.shape[0]
    B_rows = np.zeros((len(extra_rows), nz))
    B_rhs = np.zeros(len(extra_rows))
    for k, (col, ub) in enumerate(extra_rows):
        B_rows[k, col] = 1.0
        B_rhs[k] = ub
    ub_mat = np.vstack([A_ub @ S, B_rows])
    ub_rhs = np.concatenate([b_ub - A_ub @ offset, B_rhs])
    eq_mat = A_eq @ S
    eq_rhs = b_eq - A_eq @ offset
    n_ub = ub_mat.shape[0]
    m = n_ub + eq_mat.shape[0]

    M = np.zeros((m, nz + n_ub))
    M[:n_ub, :nz] = ub_mat
    M[:n_ub, nz:] = np.eye(n_ub)
    M[n_ub:, :nz] = eq_mat
    rhs = np.concatenate([ub_rhs, eq_rhs])
    cost = np.concatenate([cz, np.zeros(n_ub)])
    N = M.shape[1]

    tab = _Tableau(M, rhs, tol, max_iter)
    tab.set_costs(np.concatenate([np.zeros(N), np.ones(m)]))
    tab.run(N)
    infeas = -tab.r[-1]
    if infeas > tol * max(1.0, float(np.abs(rhs).max(initial=0.0))):
        return _finish(LpSolution(LpStatus.INFEASIBLE, float("nan"), iterations=tab.iterations))

    # drive zero-level artificials out of the basis where the row allows it
    for i in range(m):
        if tab.basis[i] >= N:
            row = tab.T[i, :N]
            nzc = np.flatnonzero(np.abs(row) > tol)
            if nzc.size:
                tab.T[i, -1] = 0.0
                tab.pivot(i, int(nzc[0]))

    tab.set_costs(np.concatenate([cost, np.zeros(m)]))
    if not tab.run(N):
        return _finish(LpSolution(LpStatus.UNBOUNDED, sense * float("-inf"), iterations=tab.iterations))

    zfull = np.zeros(N + m)
    for i, b in enumerate(tab.basis):
        zfull[b] = tab.T[i, -1]
    z = np.maximum(zfull[:nz], 0.0)
    x = offset + S @ z
    if not np.all(np.isfinite(x)):
        raise NumericFailure("non-finite primal solution")
    objective = float(c @ x)

    y = -tab.r[N : N + m] * tab.sign  # canonical duals: y = c_B B^-1
    reduced = cost - M.T @ y
    dual_infeas = float(max(0.0, -reduced.min(initial=0.0)))
    dual_obj = float(sense * (float(rhs @ y) + const))
    resid_ub = A_ub @ x - b_ub
    resid_eq = A_eq @ x - b_eq
    primal_infeas = float(
        max(resid_ub.max(initial=0.0), np.abs(resid_eq).max(initial=0.0), 0.0)
    )
    return _finish(
        LpSolution(
            LpStatus.OPTIMAL,
            objective,
            x=x,
            duals_ub=sense * y[:n_user_ub],
            duals_eq=sense * y[n_ub:],
            dual_objective=dual_obj,
            dual_infeasibility=dual_infeas,
            primal_infeasibility=primal_infeas,
            iterations=tab.iterations,
        )
    )


def _finish(sol: LpSolution) -> LpSolution:
    log = _recorder.get()
    if log is not None:
        log.append(sol)
    return sol
