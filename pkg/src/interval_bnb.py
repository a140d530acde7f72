"""Exact k=2 solver: branch-and-bound over the weight alpha in [0, 0.5].

For a fixed alpha the two-member problem h(alpha) is a MIP. Each interval
[alpha1, alpha2] gets a lower bound from two supporting lines: one through
(alpha1, h(alpha1)) with the smallest slope estimate of the left lower
problem's optimizer, one through (alpha2, h(alpha2)) with the largest slope
estimate of the right lower problem's optimizer.

When a MIP stops at a limit its best bound stands in for the exact value,
so every interval bound stays valid and the run is reported unsolved.
"""
import heapq
import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from config.config import BB2_EPS_ALPHA, BB2_TIME_LIMIT, MIP_GAP_TOL, X_STEP_TIME_LIMIT
from .errors import ArgumentError, InvariantError, SolverError
from .instance_model import KTuple, _prefix_norm, cost_of_tuple, gamma_norm
from .local_search import _raise_for, build_weighted_program, local_search, x_step
from .minmax_baseline import solve_minmax
from .mip_core import MipStatus, solve_mip
from .lp_core import Sense
from .numerics import below, tolerance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SubEval:
    alpha: float
    value: float
    x: object
    y: object
    theta: float
    gamma_vec: np.ndarray
    hit_limit: bool = False
    bound: float = None

    def __post_init__(self):
        if self.bound is None:
            object.__setattr__(self, 'bound', self.value)

    @property
    def pair(self):
        return KTuple((self.x, self.y))


@dataclass(frozen=True)
class LowerEval:
    """Lower problem outcome; ``value`` is the MIP best bound when truncated"""
    x: object
    y: object
    value: float
    slope: float
    hit_limit: bool = False


@dataclass(frozen=True)
class AlphaInterval:
    alpha1: float
    alpha2: float
    h1: float
    h2: float
    slope_low: float
    slope_up: float
    bound: float
    alpha_prime: float
    truncated: bool = False

    @property
    def width(self):
        return self.alpha2 - self.alpha1


@dataclass(frozen=True)
class Bb2Result:
    value: float
    tuple: KTuple
    gap: float
    nodes: int
    evaluations: int
    root_gap: float
    alpha_best: float
    solved: bool


def eval_g(inst, x, y, alpha):
    v = alpha * inst.d * x.bits + (1.0 - alpha) * inst.d * y.bits
    return alpha * x.nominal + (1.0 - alpha) * y.nominal + gamma_norm(v, inst.gamma)


def eval_subgradient_bounds(inst, x, y):
    """Data-only bounds (low, up) on the slope of g in alpha"""
    diff = x.nominal - y.nominal
    return (diff - _prefix_norm(y.dev_sorted, inst.gamma),
            diff + _prefix_norm(x.dev_sorted, inst.gamma))


def solve_sub(inst, alpha, warm_start=None, time_limit=X_STEP_TIME_LIMIT):
    """h(alpha): best pair with weights (alpha, 1 - alpha)"""
    xs = x_step(inst, (alpha, 1.0 - alpha), time_limit, warm_start)
    x, y = xs.tuple.members
    return SubEval(alpha, xs.value, x, y, xs.theta, xs.gamma_vec, xs.hit_limit, min(xs.bound, xs.value))


def _lower_problem(inst, norm_alpha, nominal_alpha, beta_on, time_limit=None):
    """Shared MIP of both lower problems.

    Minimizes nominal_alpha * c x + (1 - nominal_alpha) * c y
    + ||d (norm_alpha x + (1 - norm_alpha) y)|| - |alpha2 - alpha1| * ||d z||
    where z is x (beta_on=0) or y (beta_on=1). Returns the raw binary pair,
    or (None, None, bound) when the time limit cut the search short.
    """
    weights_norm = (norm_alpha, 1.0 - norm_alpha)
    weights_nom = (nominal_alpha, 1.0 - nominal_alpha)
    builder, blocks, deviating = build_weighted_program(inst, 2, weights_norm, weights_nom)
    span = abs(nominal_alpha - norm_alpha)
    betas = builder.add_variables(len(deviating), lower=0.0, upper=1.0, cost=-span * inst.d[deviating])
    target = blocks[beta_on]
    for i, b in zip(deviating, betas):
        builder.add_row([b, target[i]], [1.0, -1.0], Sense.LE, 0.0)
    if len(betas):
        builder.add_row(betas, np.ones(len(betas)), Sense.LE, inst.gamma)
    result = solve_mip(builder.build(), time_limit=time_limit)
    if result.status == MipStatus.TIME_LIMIT:
        logger.warning(f"Interval lower problem stopped at its time limit with bound {result.bound:.6f}")
        return None, None, result.bound
    _raise_for(result, "Interval lower problem")
    x = inst.solution(result.x[blocks[0]])
    y = inst.solution(result.x[blocks[1]])
    return x, y, None


def lower_problem_left(inst, alpha1, alpha2, time_limit=None):
    """min over pairs of g(alpha1) + (alpha2 - alpha1) * low"""
    x, y, bound = _lower_problem(inst, alpha1, alpha2, beta_on=1, time_limit=time_limit)
    if x is None:
        return LowerEval(None, None, bound, math.nan, hit_limit=True)
    low, _ = eval_subgradient_bounds(inst, x, y)
    return LowerEval(x, y, eval_g(inst, x, y, alpha1) + (alpha2 - alpha1) * low, low)


def lower_problem_right(inst, alpha1, alpha2, time_limit=None):
    """min over pairs of g(alpha2) + (alpha1 - alpha2) * up"""
    x, y, bound = _lower_problem(inst, alpha2, alpha1, beta_on=0, time_limit=time_limit)
    if x is None:
        return LowerEval(None, None, bound, math.nan, hit_limit=True)
    _, up = eval_subgradient_bounds(inst, x, y)
    return LowerEval(x, y, eval_g(inst, x, y, alpha2) + (alpha1 - alpha2) * up, up)


def bound_from_lines(alpha1, alpha2, h1, h2, slope_low, slope_up):
    """Minimum over [alpha1, alpha2] of the upper envelope of both lines.

    Returns (L, alpha_prime): the crossing point when the lines cross
    inside the interval, otherwise the midpoint.
    """
    width = alpha2 - alpha1
    slack = tolerance(max(abs(h1), abs(h2))) + 4 * MIP_GAP_TOL * max(1.0, abs(h1), abs(h2)) / width
    if slope_low > slope_up + slack:
        raise InvariantError(f"Slope estimates out of order: low {slope_low} > up {slope_up}")

    f1 = lambda a: h1 + (a - alpha1) * slope_low
    f2 = lambda a: h2 + (a - alpha2) * slope_up
    if slope_low != slope_up:
        crossing = (h2 - h1 + alpha1 * slope_low - alpha2 * slope_up) / (slope_low - slope_up)
        if alpha1 < crossing < alpha2:
            return min(f1(crossing), h1, h2), crossing
    bound = max(min(f1(alpha1), f1(alpha2)), min(f2(alpha1), f2(alpha2)))
    return min(bound, h1, h2), 0.5 * (alpha1 + alpha2)


def interval_bound(inst, alpha1, alpha2, h1, h2, time_limit=None):
    """Lower bound on h over [alpha1, alpha2]; h1 and h2 may be lower bounds themselves"""
    left = lower_problem_left(inst, alpha1, alpha2, time_limit)
    right = lower_problem_right(inst, alpha1, alpha2, time_limit)
    if left.hit_limit or right.hit_limit:
        # h over the interval is at least min(h(alpha1), left) and min(h(alpha2), right)
        bound = max(min(h1, left.value), min(h2, right.value))
        return AlphaInterval(alpha1, alpha2, h1, h2, left.slope, right.slope, bound,
                             0.5 * (alpha1 + alpha2), truncated=True)
    bound, alpha_prime = bound_from_lines(alpha1, alpha2, h1, h2, left.slope, right.slope)
    # splits hugging an endpoint make no progress
    if min(alpha_prime - alpha1, alpha2 - alpha_prime) < 1e-3 * (alpha2 - alpha1):
        alpha_prime = 0.5 * (alpha1 + alpha2)
    return AlphaInterval(alpha1, alpha2, h1, h2, left.slope, right.slope, bound, alpha_prime)


class _Search:
    """Mutable state of one branch-and-bound run"""

    def __init__(self, inst, x_time_limit, run_logger, started):
        self.inst = inst
        self.x_time_limit = x_time_limit
        self.run_logger = run_logger
        self.started = started
        self.evaluated = {}
        self.ub = math.inf
        self.best = None
        self.alpha_best = None
        self.truncated = False
        # smallest bound of an interval dropped without a proof
        self.floor = math.inf

    def offer(self, t, alpha):
        value, _ = cost_of_tuple(self.inst, t)
        if not below(value, self.ub):
            return False
        self.ub, self.best, self.alpha_best = value, t, alpha
        logger.info(f"BB2 upper bound {value:.6f} at alpha={alpha:.6f}")
        if self.run_logger is not None:
            self.run_logger.log_event('bb2_ub', value, time.monotonic() - self.started, {'alpha': alpha})
        return True

    def h(self, alpha):
        """Valid lower bound on h(alpha), exact unless the x-step was truncated"""
        if alpha in self.evaluated:
            return self.evaluated[alpha].bound
        warm = self.best if self.best is not None and self.best.k == 2 else None
        if self.evaluated:
            nearest = min(self.evaluated, key=lambda a: abs(a - alpha))
            warm = self.evaluated[nearest].pair
        sub = solve_sub(self.inst, alpha, warm, self.x_time_limit)
        self.evaluated[alpha] = sub
        if sub.hit_limit:
            self.truncated = True
        if self.offer(sub.pair, alpha):
            restart = np.array([alpha, 1.0 - alpha])
            t, _, _ = local_search(self.inst, 2, self.x_time_limit, alpha0=restart, warm_start=sub.pair)
            self.offer(t, alpha)
        return sub.bound


def _canonical_alpha(t, alpha):
    """Map weights into [0, 0.5] by swapping members"""
    if alpha[0] > 0.5:
        return KTuple((t[1], t[0])), float(alpha[1])
    return t, float(alpha[0])


def _fallback_pair(inst, error):
    """Min-max solution doubled up, for when the heuristic found nothing"""
    try:
        minmax = solve_minmax(inst)
    except ArgumentError:
        raise error from None
    logger.warning(f"BB2 starts from the min-max solution: {error}")
    return KTuple((minmax.solution, minmax.solution))


def solve_bb2(inst, time_limit=BB2_TIME_LIMIT, eps_alpha=BB2_EPS_ALPHA, candidate_set=None,
              x_time_limit=X_STEP_TIME_LIMIT, run_logger=None):
    """Exact min over pairs; candidate_set optionally enables interval discarding"""
    started = time.monotonic()
    deadline = started + time_limit
    search = _Search(inst, x_time_limit, run_logger, started)

    try:
        heur_tuple, _, state = local_search(inst, 2, x_time_limit)
        heur_tuple, alpha_star = _canonical_alpha(heur_tuple, state.block.alpha)
    except SolverError as e:
        heur_tuple, alpha_star = _fallback_pair(inst, e), 0.0
    search.offer(heur_tuple, alpha_star)

    points = sorted({0.0, alpha_star, 0.5})
    points = [p for i, p in enumerate(points) if i == 0 or p - points[i - 1] >= eps_alpha]
    values = [search.h(p) for p in points]

    candidates = None if candidate_set is None else np.sort(np.asarray(candidate_set, dtype=float))

    def admissible(a1, a2):
        if candidates is None:
            return True
        i = np.searchsorted(candidates, a1 - 1e-12)
        return i < len(candidates) and candidates[i] <= a2 + 1e-12

    heap = []
    seq = 0

    def push(a1, a2, h1, h2):
        nonlocal seq
        if not admissible(a1, a2):
            return
        if a2 - a1 < eps_alpha:
            if search.truncated:
                interval = interval_bound(inst, a1, a2, h1, h2, max(0.0, deadline - time.monotonic()))
                search.floor = min(search.floor, interval.bound)
            return
        interval = interval_bound(inst, a1, a2, h1, h2, max(0.0, deadline - time.monotonic()))
        if interval.truncated:
            search.truncated = True
        if below(interval.bound, search.ub):
            heapq.heappush(heap, (interval.bound, -interval.width, seq, interval))
            seq += 1

    for (a1, h1), (a2, h2) in zip(zip(points, values), zip(points[1:], values[1:])):
        push(a1, a2, h1, h2)
    root_lb = min([entry[0] for entry in heap] + [search.floor, search.ub])
    root_gap = (search.ub - root_lb) / search.ub if search.ub > 0 else 0.0

    nodes = 0
    timed_out = False
    while heap:
        if time.monotonic() > deadline:
            logger.warning(f"BB2 stopped at its time limit after {nodes} intervals")
            timed_out = True
            break
        bound, _, _, interval = heapq.heappop(heap)
        if not below(bound, search.ub):
            heap.clear()
            break
        nodes += 1
        mid = interval.alpha_prime
        h_mid = search.h(mid)
        logger.debug(f"Split [{interval.alpha1:.6f}, {interval.alpha2:.6f}] at {mid:.6f}, L={bound:.6f}")
        push(interval.alpha1, mid, interval.h1, h_mid)
        push(mid, interval.alpha2, h_mid, interval.h2)

    lower = min([entry[0] for entry in heap] + [search.floor, search.ub])
    gap = max(0.0, search.ub - lower)
    solved = not timed_out and not search.truncated
    if search.truncated:
        logger.warning(f"BB2 used truncated subproblems; gap {gap:.6f} is against their best bounds")
    logger.info(f"BB2 finished: value {search.ub:.6f}, {nodes} intervals, {len(search.evaluated)} evaluations")
    return Bb2Result(search.ub, search.best, gap, nodes, len(search.evaluated), root_gap,
                     search.alpha_best, solved)
