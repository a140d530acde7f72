"""Dense two-phase bounded-variable simplex.

Every LP of the suite (tuple evaluation, alpha-steps, MIP relaxations) goes
through :func:`solve_lp`. The solver works on a dense tableau: variables are
shifted/mirrored so that each standard column lives in ``[0, u]``, nonbasic
columns sitting at their upper bound are complemented (``x = u - x'``), and
phase 1 uses one artificial per row, never a big-M.

Dual sign convention (fixed for the whole package): reduced costs are
``d = c - A^T y``; a ``<=`` row carries ``y_i <= 0``, a ``>=`` row
``y_i >= 0`` and an ``=`` row a free multiplier.
"""
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from config.config import LP_FEAS_TOL, LP_OPT_TOL, LP_PIVOT_TOL, LP_MAX_PIVOTS
from .errors import ArgumentError

logger = logging.getLogger(__name__)


class Sense(str, Enum):
    LE = '<='
    EQ = '='
    GE = '>='


class LpStatus(str, Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'
    NUMERICAL_FAILURE = 'numerical_failure'


def _readonly(values):
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LinearProgram:
    """Minimize ``objective @ x`` subject to tagged rows and bounds."""
    objective: np.ndarray
    matrix: np.ndarray
    senses: tuple
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        c = _readonly(self.objective)
        n = c.shape[0]
        rhs = _readonly(self.rhs).reshape(-1)
        m = rhs.shape[0]
        A = np.array(self.matrix, dtype=float)
        if A.size == 0:
            A = np.zeros((m, n))
        A = A.reshape(m, n) if A.ndim == 1 else A
        A.setflags(write=False)
        lower = _readonly(self.lower)
        upper = _readonly(self.upper)
        senses = tuple(Sense(s) for s in self.senses)

        if A.shape != (m, n):
            raise ArgumentError(f"Constraint matrix has shape {A.shape}, expected {(m, n)}")
        if len(senses) != m:
            raise ArgumentError(f"Got {len(senses)} row senses for {m} rows")
        if lower.shape != (n,) or upper.shape != (n,):
            raise ArgumentError("Bounds must have one entry per variable")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(c)) and np.all(np.isfinite(rhs))):
            raise ArgumentError("Objective, matrix and right-hand side must be finite")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ArgumentError("Bounds must not be NaN")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise ArgumentError("Lower bounds cannot be +inf and upper bounds cannot be -inf")

        object.__setattr__(self, 'objective', c)
        object.__setattr__(self, 'matrix', A)
        object.__setattr__(self, 'senses', senses)
        object.__setattr__(self, 'rhs', rhs)
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)

    @property
    def num_vars(self):
        return self.objective.shape[0]

    @property
    def num_rows(self):
        return self.rhs.shape[0]

    def row_violation(self, x):
        """Largest violation of the tagged rows at x"""
        if self.num_rows == 0:
            return 0.0
        activity = self.matrix @ x
        worst = 0.0
        for i, sense in enumerate(self.senses):
            gap = activity[i] - self.rhs[i]
            if sense == Sense.LE:
                worst = max(worst, gap)
            elif sense == Sense.GE:
                worst = max(worst, -gap)
            else:
                worst = max(worst, abs(gap))
        return float(worst)

    def bound_violation(self, x, lower=None, upper=None):
        lower = self.lower if lower is None else lower
        upper = self.upper if upper is None else upper
        if x.size == 0:
            return 0.0
        return float(max(np.max(lower - x, initial=0.0), np.max(x - upper, initial=0.0)))


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    objective: float = float('nan')
    x: np.ndarray = None
    duals: np.ndarray = None
    reduced_costs: np.ndarray = None
    pivots: int = 0

    @property
    def optimal(self):
        return self.status == LpStatus.OPTIMAL


class _Tableau:
    """Bounded primal simplex over ``A x = b, 0 <= x <= u`` with ``b >= 0``."""

    def __init__(self, A, b, upper, max_pivots):
        m, N = A.shape
        self.m, self.N = m, N
        self.T = np.zeros((m + 1, N + m + 1))
        self.T[:m, :N] = A
        self.T[:m, N:N + m] = np.eye(m)
        self.T[:m, -1] = b
        self.upper = np.concatenate([upper, np.full(m, np.inf)])
        self.flipped = np.zeros(N + m, dtype=bool)
        self.basis = np.arange(N, N + m)
        self.rows = np.arange(m)
        self.max_pivots = max_pivots
        self.pivots = 0

    def phase_one(self):
        """Minimize the sum of artificials; drop them once feasible"""
        m, N = self.m, self.N
        self.T[-1, :] = 0.0
        if m:
            self.T[-1, :N] = -self.T[:m, :N].sum(axis=0)
            self.T[-1, -1] = -self.T[:m, -1].sum()
        status = self._run()
        if status != LpStatus.OPTIMAL:
            return status
        scale = max(1.0, float(np.abs(self.T[:m, -1]).max(initial=0.0)))
        if -self.T[-1, -1] > LP_FEAS_TOL * scale:
            return LpStatus.INFEASIBLE
        self._drop_artificials()
        return LpStatus.OPTIMAL

    def phase_two(self, cost):
        c = np.where(self.flipped, -cost, cost)
        constant = float(np.sum(cost[self.flipped] * self.upper[self.flipped]))
        cB = c[self.basis]
        self.T[-1, :-1] = c - cB @ self.T[:-1, :-1]
        self.T[-1, -1] = -(constant + cB @ self.T[:-1, -1])
        return self._run()

    def values(self):
        vals = np.zeros(self.N)
        vals[self.basis] = self.T[:-1, -1]
        return np.where(self.flipped, self.upper - vals, vals)

    def _drop_artificials(self):
        N = self.N
        redundant = []
        for i in range(self.m):
            if self.basis[i] < N:
                continue
            basic = np.zeros(self.T.shape[1] - 1, dtype=bool)
            basic[self.basis] = True
            row = self.T[i, :N]
            candidates = np.flatnonzero((np.abs(row) > LP_PIVOT_TOL) & ~basic[:N])
            if candidates.size:
                self._pivot(i, candidates[np.argmax(np.abs(row[candidates]))])
            else:
                redundant.append(i)
        if redundant:
            logger.debug(f"Dropping {len(redundant)} redundant rows after phase 1")
            self.T = np.delete(self.T, redundant, axis=0)
            self.basis = np.delete(self.basis, redundant)
            self.rows = np.delete(self.rows, redundant)
            self.m -= len(redundant)
        self.T = np.delete(self.T, np.s_[N:N + self.T.shape[1] - 1 - N], axis=1)
        self.upper = self.upper[:N]
        self.flipped = self.flipped[:N]

    def _run(self):
        degenerate = 0
        bland = False
        patience = 5 * (self.m + self.T.shape[1] - 1)
        while True:
            if self.pivots >= self.max_pivots:
                logger.warning(f"Simplex stopped after {self.pivots} pivots")
                return LpStatus.NUMERICAL_FAILURE
            d = self.T[-1, :-1]
            basic = np.zeros(d.size, dtype=bool)
            basic[self.basis] = True
            eligible = np.flatnonzero((d < -LP_OPT_TOL) & ~basic)
            if eligible.size == 0:
                return LpStatus.OPTIMAL
            j = eligible[0] if bland else eligible[np.argmin(d[eligible])]
            step, row, leaves_at_upper = self._ratio_test(j, bland)
            if step == np.inf:
                return LpStatus.UNBOUNDED
            self.pivots += 1
            if row is None:
                self._flip_nonbasic(j)
            else:
                if leaves_at_upper:
                    self._flip_basic(row)
                self._pivot(row, j)

            if step <= LP_FEAS_TOL:
                degenerate += 1
                if degenerate > patience and not bland:
                    logger.debug(f"Switching to Bland's rule after {degenerate} degenerate pivots")
                    bland = True
            else:
                degenerate = 0
                bland = False

    def _ratio_test(self, j, bland):
        col = self.T[:-1, j]
        rhs = self.T[:-1, -1]
        ub_basic = self.upper[self.basis]
        ratios = np.full(self.m, np.inf)
        pos = col > LP_PIVOT_TOL
        ratios[pos] = np.maximum(rhs[pos], 0.0) / col[pos]
        neg = (col < -LP_PIVOT_TOL) & np.isfinite(ub_basic)
        ratios[neg] = np.maximum(ub_basic[neg] - rhs[neg], 0.0) / -col[neg]
        best = ratios.min(initial=np.inf)
        if self.upper[j] <= best:
            return self.upper[j], None, False
        ties = np.flatnonzero(ratios <= best + LP_PIVOT_TOL)
        if bland:
            row = ties[np.argmin(self.basis[ties])]
        else:
            row = ties[np.argmax(np.abs(col[ties]))]
        return best, int(row), bool(neg[row])

    def _pivot(self, i, j):
        T = self.T
        T[i] /= T[i, j]
        col = T[:, j].copy()
        col[i] = 0.0
        T -= np.outer(col, T[i])
        self.basis[i] = j

    def _flip_nonbasic(self, j):
        u = self.upper[j]
        self.T[:, -1] -= self.T[:, j] * u
        self.T[:, j] *= -1.0
        self.flipped[j] = not self.flipped[j]

    def _flip_basic(self, i):
        j = self.basis[i]
        self.T[i] *= -1.0
        self.T[i, j] = 1.0
        self.T[i, -1] += self.upper[j]
        self.flipped[j] = not self.flipped[j]


def solve_lp(lp, lower=None, upper=None, max_pivots=LP_MAX_PIVOTS):
    """Solve ``lp`` (optionally with overriding variable bounds)"""
    lower = lp.lower if lower is None else np.asarray(lower, dtype=float)
    upper = lp.upper if upper is None else np.asarray(upper, dtype=float)
    if np.any(lower > upper + LP_FEAS_TOL):
        return LpSolution(LpStatus.INFEASIBLE)

    n, m = lp.num_vars, lp.num_rows
    A, c = lp.matrix, lp.objective

    # presolve: substitute fixed variables, drop empty rows
    fixed = np.isfinite(lower) & np.isfinite(upper) & (upper - lower <= LP_FEAS_TOL)
    free = np.flatnonzero(~fixed)
    x = np.where(fixed, np.where(np.isfinite(lower), lower, 0.0), 0.0)
    b = lp.rhs - A[:, fixed] @ x[fixed] if m else lp.rhs.copy()

    active = np.ones(m, dtype=bool)
    for i in range(m):
        if np.any(A[i, free] != 0.0):
            continue
        active[i] = False
        sense = lp.senses[i]
        scale = LP_FEAS_TOL * max(1.0, abs(lp.rhs[i]))
        if (sense == Sense.LE and b[i] < -scale) or (sense == Sense.GE and b[i] > scale) \
                or (sense == Sense.EQ and abs(b[i]) > scale):
            return LpSolution(LpStatus.INFEASIBLE)
    rows = np.flatnonzero(active)

    # standard columns: x_j = offset_j + sum(sign * x'), x' in [0, u']
    col_var, col_sign, col_upper = [], [], []
    offset = np.zeros(n)
    for j in free:
        lo, up = lower[j], upper[j]
        if np.isfinite(lo):
            offset[j] = lo
            col_var.append(j), col_sign.append(1.0), col_upper.append(up - lo)
        elif np.isfinite(up):
            offset[j] = up
            col_var.append(j), col_sign.append(-1.0), col_upper.append(np.inf)
        else:
            col_var.extend([j, j]), col_sign.extend([1.0, -1.0]), col_upper.extend([np.inf, np.inf])
    col_var = np.array(col_var, dtype=int)
    col_sign = np.array(col_sign)

    b_std = b[rows] - A[np.ix_(rows, free)] @ offset[free] if rows.size else np.zeros(0)
    struct = A[np.ix_(rows, col_var)] * col_sign if rows.size else np.zeros((0, col_var.size))
    slack_cols = []
    for r, i in enumerate(rows):
        if lp.senses[i] == Sense.LE:
            slack_cols.append((r, 1.0))
        elif lp.senses[i] == Sense.GE:
            slack_cols.append((r, -1.0))
    slacks = np.zeros((rows.size, len(slack_cols)))
    for s, (r, sign) in enumerate(slack_cols):
        slacks[r, s] = sign
    A_std = np.hstack([struct, slacks])
    c_std = np.concatenate([c[col_var] * col_sign, np.zeros(len(slack_cols))])
    u_std = np.concatenate([np.array(col_upper, dtype=float), np.full(len(slack_cols), np.inf)])

    flip = b_std < 0
    A_norm = np.where(flip[:, None], -A_std, A_std)
    b_norm = np.abs(b_std)

    tableau = _Tableau(A_norm, b_norm, u_std, max_pivots)
    status = tableau.phase_one()
    if status != LpStatus.OPTIMAL:
        return LpSolution(status, pivots=tableau.pivots)
    status = tableau.phase_two(c_std)
    if status != LpStatus.OPTIMAL:
        return LpSolution(status, pivots=tableau.pivots)

    x_std = tableau.values()
    x_free = offset.copy()
    np.add.at(x_free, col_var, col_sign * x_std[:col_var.size])
    x[free] = x_free[free]

    # duals from the final basis on the un-normalized rows
    duals = np.zeros(m)
    if tableau.m:
        kept_rows = tableau.rows
        B = A_std[np.ix_(kept_rows, tableau.basis)]
        try:
            y = np.linalg.solve(B.T, c_std[tableau.basis])
        except np.linalg.LinAlgError:
            y = np.linalg.lstsq(B.T, c_std[tableau.basis], rcond=None)[0]
        duals[rows[kept_rows]] = y
    reduced = c - A.T @ duals if m else c.copy()

    violation = max(lp.row_violation(x), lp.bound_violation(x, lower, upper))
    if violation > 10 * LP_FEAS_TOL * max(1.0, float(np.abs(lp.rhs).max(initial=0.0))):
        logger.warning(f"LP solution violates constraints by {violation:.3e}")

    return LpSolution(LpStatus.OPTIMAL, float(c @ x), x, duals, reduced, tableau.pivots)
