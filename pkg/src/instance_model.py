"""Problem data and exact worst-case evaluation of solutions and k-tuples."""
import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from config.config import (
    BRUTE_FORCE_SOLUTION_CAP, BRUTE_FORCE_TUPLE_CAP, DUAL_ORACLE_GRID, ENUM_OUTPUT_CAP,
)
from .errors import ArgumentError, InfeasibleError, SizeLimitError, SolverError, UnsupportedError
from .ground_sets import enumerate_under
from .lp_core import LinearProgram, Sense, solve_lp
from .numerics import below

logger = logging.getLogger(__name__)


def _readonly(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _prefix_norm(v_sorted, g):
    """Gamma-norm of an already decreasingly sorted vector"""
    whole = int(math.floor(g))
    total = float(np.sum(v_sorted[:whole]))
    frac = g - whole
    if frac > 0 and whole < len(v_sorted):
        total += frac * float(v_sorted[whole])
    return total


def gamma_norm(v, g):
    """Sum of the g largest entries of v, fractionally extended"""
    v = np.asarray(v, dtype=float)
    if g < 0 or g > len(v) + 1e-12:
        raise ArgumentError(f"Budget {g} outside [0, {len(v)}]")
    return _prefix_norm(np.sort(v)[::-1], min(g, len(v)))


@dataclass(frozen=True, eq=False)
class Solution:
    bits: np.ndarray
    nominal: float
    dev_sorted: np.ndarray
    perm: np.ndarray

    @property
    def key(self):
        return self.bits.tobytes()

    def __eq__(self, other):
        return isinstance(other, Solution) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def deviation_within(self, amount):
        """Largest deviation collectable on this solution with budget ``amount``"""
        return _prefix_norm(self.dev_sorted, min(amount, len(self.dev_sorted)))

    def items(self):
        return np.flatnonzero(self.bits)


@dataclass(frozen=True)
class KTuple:
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ArgumentError("A tuple needs at least one member")
        object.__setattr__(self, 'members', members)

    @property
    def k(self):
        return len(self.members)

    @property
    def nominals(self):
        return np.array([x.nominal for x in self.members])

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __getitem__(self, j):
        return self.members[j]


@dataclass(frozen=True)
class Scenario:
    z: np.ndarray
    costs: np.ndarray


@dataclass(frozen=True)
class BudgetedInstance:
    c_hat: np.ndarray
    d: np.ndarray
    gamma: float
    ground: object

    def __post_init__(self):
        c_hat = _readonly(self.c_hat)
        d = _readonly(self.d)
        n = self.ground.n
        if c_hat.shape != (n,) or d.shape != (n,):
            raise ArgumentError(f"Cost vectors must have length {n}")
        if not (np.all(np.isfinite(c_hat)) and np.all(np.isfinite(d))):
            raise ArgumentError("Costs and deviations must be finite")
        if np.any(c_hat < 0) or np.any(d < 0):
            raise ArgumentError("Costs and deviations must be nonnegative")
        gamma = float(self.gamma)
        if not math.isfinite(gamma) or gamma < 0:
            raise ArgumentError(f"Invalid budget {self.gamma}")
        if gamma > n:
            logger.info(f"Clamping budget {gamma} to n={n}")
            gamma = float(n)
        object.__setattr__(self, 'c_hat', c_hat)
        object.__setattr__(self, 'd', d)
        object.__setattr__(self, 'gamma', gamma)

    @property
    def n(self):
        return self.ground.n

    def with_gamma(self, gamma):
        return BudgetedInstance(self.c_hat, self.d, gamma, self.ground)

    def solution(self, bits):
        bits = _readonly(np.round(bits), dtype=np.int8)
        if bits.shape != (self.n,):
            raise ArgumentError(f"Solution must have {self.n} entries")
        deviations = self.d * bits
        # stable sort: ties keep ascending item index
        perm = np.argsort(-deviations, kind='stable')
        return Solution(bits, float(self.c_hat @ bits), _readonly(deviations[perm]), _readonly(perm, dtype=int))

    def tuple_of(self, *bit_vectors):
        return KTuple(tuple(self.solution(b) for b in bit_vectors))

    def enumerate_solutions(self, ub=math.inf, method='dfs', cap=ENUM_OUTPUT_CAP):
        """Solutions with nominal cost strictly below ub, cheapest first"""
        return [self.solution(b) for b in enumerate_under(self.ground, self.c_hat, ub, method, cap)]


def worst_case_single(inst, x):
    return x.nominal + _prefix_norm(x.dev_sorted, inst.gamma)


def cost_of_tuple(inst, t):
    """Worst-case cost of a tuple: max over scenarios of its cheapest member"""
    nominals = t.nominals
    support = np.zeros(inst.n, dtype=bool)
    for x in t:
        support |= x.bits.astype(bool)
    support &= inst.d > 0
    items = np.flatnonzero(support)
    z = np.zeros(inst.n)

    if items.size and inst.gamma > 0:
        m = len(items)
        # variables: zeta over the support, then the free level variable
        matrix = np.zeros((t.k + 1, m + 1))
        for j, x in enumerate(t):
            matrix[j, :m] = -inst.d[items] * x.bits[items]
            matrix[j, m] = 1.0
        matrix[t.k, :m] = 1.0
        lp = LinearProgram(
            objective=np.concatenate([np.zeros(m), [-1.0]]),
            matrix=matrix,
            senses=[Sense.LE] * (t.k + 1),
            rhs=np.concatenate([nominals, [inst.gamma]]),
            lower=np.concatenate([np.zeros(m), [-math.inf]]),
            upper=np.concatenate([np.ones(m), [math.inf]]),
        )
        sol = solve_lp(lp)
        if not sol.optimal:
            raise SolverError("Tuple evaluation LP failed", sol.status.value)
        z[items] = np.clip(sol.x[:m], 0.0, 1.0)
        if z.sum() > inst.gamma:
            z *= inst.gamma / z.sum()

    costs = inst.c_hat + inst.d * z
    value = min(float(costs @ x.bits) for x in t)
    return value, Scenario(_readonly(z), _readonly(costs))


def _dual_objective(inst, t, alpha):
    v = np.zeros(inst.n)
    for a, x in zip(alpha, t):
        v += a * inst.d * x.bits
    return float(np.dot(alpha, t.nominals)) + gamma_norm(v, inst.gamma)


def cost_of_tuple_dual_oracle(inst, t, grid=DUAL_ORACLE_GRID):
    """Minimum of the dual expression over weight vectors (k <= 3).

    A uniform simplex grid is scanned, then refined with bounded Brent
    searches; the result is an upper bound on cost_of_tuple.
    """
    k = t.k
    if k > 3:
        raise UnsupportedError("The dual oracle handles at most three members")
    if grid < 10:
        raise ArgumentError("Grid needs at least 10 steps")
    if k == 1:
        return worst_case_single(inst, t[0])

    options = {'xatol': 1e-10}
    if k == 2:
        f = lambda a: _dual_objective(inst, t, (a, 1.0 - a))
        values = [f(i / grid) for i in range(grid + 1)]
        i = int(np.argmin(values))
        lo, hi = max(0.0, (i - 1) / grid), min(1.0, (i + 1) / grid)
        refined = minimize_scalar(f, bounds=(lo, hi), method='bounded', options=options)
        return min(values[i], float(refined.fun))

    f = lambda a, b: _dual_objective(inst, t, (a, b, max(0.0, 1.0 - a - b)))
    best = min(f(i / grid, j / grid) for i in range(grid + 1) for j in range(grid + 1 - i))

    def inner(a):
        res = minimize_scalar(lambda b: f(a, b), bounds=(0.0, 1.0 - a), method='bounded', options=options)
        return float(res.fun)

    outer = minimize_scalar(inner, bounds=(0.0, 1.0), method='bounded', options=options)
    return min(best, float(outer.fun))


def brute_force_optimum(inst, k, solutions=None):
    """Exact optimum over all unordered k-tuples of enumerated solutions"""
    if k < 1:
        raise ArgumentError("k must be at least 1")
    if solutions is None:
        try:
            solutions = inst.enumerate_solutions(cap=BRUTE_FORCE_SOLUTION_CAP)
        except SizeLimitError as e:
            raise SizeLimitError(f"Too many solutions for brute force; use a smaller instance ({e})") from e
    if len(solutions) > BRUTE_FORCE_SOLUTION_CAP:
        raise SizeLimitError(f"{len(solutions)} solutions exceed the brute-force cap; use a smaller instance")
    if not solutions:
        raise InfeasibleError("Ground set has no feasible solution")
    r = min(k, len(solutions))
    if math.comb(len(solutions), r) > BRUTE_FORCE_TUPLE_CAP:
        raise SizeLimitError(f"C({len(solutions)}, {r}) tuples exceed the brute-force cap; use a smaller instance")

    solutions = sorted(solutions, key=lambda x: x.nominal)
    best_value, best_tuple = math.inf, None
    for combo in itertools.combinations(solutions, r):
        # members are sorted by nominal, so combo[0] is the cheapest
        if not below(combo[0].nominal, best_value):
            continue
        t = KTuple(combo)
        value, _ = cost_of_tuple(inst, t)
        if value < best_value:
            best_value, best_tuple = value, t
    logger.debug(f"Brute force k={k}: {best_value}")
    return best_value, best_tuple
