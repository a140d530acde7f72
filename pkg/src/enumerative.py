"""Enumerative exact algorithm for k in {2, 3} with resistance pruning.

Solutions cheaper than the incumbent are enumerated once per round and
partitioned by resistance (the discrete deviation mass, in steps of 1/q,
needed to push a solution's cost up to UB). Tuples whose resistances sum to
at most q*Gamma cannot beat UB and are never generated; the rest pass a
LB1 -> LB2 -> exact LP cascade. Any improvement restarts the round.
"""
import logging
import math
import time
from dataclasses import dataclass, field

from config.config import IT_DEFAULT_Q, IT_MEMORY_CAP, IT_TIME_LIMIT, X_STEP_TIME_LIMIT
from .errors import ArgumentError, InvariantError, SizeLimitError, SolverError, UnsupportedError
from .instance_model import KTuple, cost_of_tuple, worst_case_single
from .local_search import local_search
from .minmax_baseline import solve_minmax
from .numerics import below

logger = logging.getLogger(__name__)

TIME_CHECK_INTERVAL = 1000


class BoundCache:
    """Per-solution lb and worst-case values for one round"""

    def __init__(self, inst, k, solutions):
        self.k = k
        self._lb = {}
        self._wc = {}
        for x in solutions:
            self._lb[x.key] = lb_solution(inst, x, k)
            self._wc[x.key] = worst_case_single(inst, x)

    def __contains__(self, x):
        return x.key in self._lb

    def __len__(self):
        return len(self._lb)

    def lb(self, x):
        try:
            return self._lb[x.key]
        except KeyError:
            raise InvariantError("Tuple member missing from the bound cache") from None

    def worst_case(self, x):
        return self._wc[x.key]


@dataclass
class ResistanceBuckets:
    q: int
    ub_snapshot: float
    buckets: dict

    @property
    def sizes(self):
        return {omega: len(members) for omega, members in self.buckets.items()}

    def searchable(self):
        """Bucket indices taking part in the tuple search (omega >= 1), descending"""
        return sorted((w for w, members in self.buckets.items() if w >= 1 and members), reverse=True)


@dataclass
class ItResult:
    value: float
    tuple: KTuple
    solved: bool
    rob_opt: float = math.nan
    heur: float = math.nan
    restarts: int = 0
    stored: list = field(default_factory=list)
    enumerated: int = 0
    reached_lb1: int = 0
    reached_lb2: int = 0
    reached_cost: int = 0


def initial_incumbent(inst, k, x_time_limit=X_STEP_TIME_LIMIT):
    """Best of the min-max optimum and the heuristic: (tuple, value, rob_opt, heur)"""
    rob_opt, incumbent = math.inf, None
    try:
        minmax = solve_minmax(inst)
        rob_opt, incumbent = minmax.value, KTuple((minmax.solution,))
    except ArgumentError as e:
        logger.info(f"Skipping min-max bound: {e}")
    try:
        heur_tuple, heur, _ = local_search(inst, k, x_time_limit)
    except SolverError as e:
        if incumbent is None:
            raise
        logger.warning(f"Heuristic gave no tuple, keeping the min-max solution: {e}")
        heur_tuple, heur = None, math.inf
    if heur < rob_opt:
        return heur_tuple, heur, rob_opt, heur
    return incumbent, rob_opt, rob_opt, heur


def initial_upper_bound(inst, k, x_time_limit=X_STEP_TIME_LIMIT):
    return initial_incumbent(inst, k, x_time_limit)[1]


def lb_solution(inst, x, k):
    """Nominal cost plus the deviation reachable with budget Gamma/k"""
    return x.nominal + x.deviation_within(inst.gamma / k)


def lb1_tuple(cache, t):
    return min(cache.lb(x) for x in t)


def lb2_tuple(inst, t):
    """Greedy: each budget unit goes to the currently cheapest member"""
    costs = [x.nominal for x in t]
    used = [0] * len(costs)
    whole = int(math.floor(inst.gamma))
    steps = [1.0] * whole
    if inst.gamma - whole > 0:
        steps.append(inst.gamma - whole)
    for amount in steps:
        j = min(range(len(costs)), key=lambda i: (costs[i], i))
        dev = t[j].dev_sorted
        if used[j] < len(dev):
            costs[j] += amount * float(dev[used[j]])
        used[j] += 1
    return min(costs)


def resistance(inst, x, ub, q):
    """Smallest omega whose deviation mass omega/q lifts x to ub, capped at floor(q*Gamma)"""
    cap = int(math.floor(q * inst.gamma + 1e-9))
    for omega in range(cap + 1):
        if not below(x.nominal + x.deviation_within(omega / q), ub):
            return omega
    return cap


def build_buckets(inst, solutions, ub, q):
    buckets = {}
    for x in solutions:
        buckets.setdefault(resistance(inst, x, ub, q), []).append(x)
    for members in buckets.values():
        members.sort(key=lambda x: x.nominal)
    return ResistanceBuckets(q, ub, buckets)


def _omega_tuples(levels, arity, total_cap):
    """Nonincreasing omega sequences over levels whose sum exceeds total_cap"""
    def extend(prefix, start):
        if len(prefix) == arity:
            if sum(prefix) > total_cap:
                yield tuple(prefix)
            return
        for i in range(start, len(levels)):
            yield from extend(prefix + [levels[i]], i)
    yield from extend([], 0)


def _member_tuples(buckets, omegas):
    """Index-increasing member choices inside repeated buckets"""
    def extend(pos, prev, chosen):
        if pos == len(omegas):
            yield tuple(chosen)
            return
        members = buckets[omegas[pos]]
        start = prev + 1 if pos > 0 and omegas[pos] == omegas[pos - 1] else 0
        for s in range(start, len(members)):
            chosen.append(members[s])
            yield from extend(pos + 1, s, chosen)
            chosen.pop()
    yield from extend(0, -1, [])


def iterate_tuples(buckets, arity, gamma):
    """All candidate tuples for one round, in search order"""
    levels = buckets.searchable()
    for omegas in _omega_tuples(levels, arity, buckets.q * gamma + 1e-9):
        yield from _member_tuples(buckets.buckets, omegas)


def solve_it(inst, k, q=IT_DEFAULT_Q, time_limit=IT_TIME_LIMIT, enumerator='dfs',
             memory_cap=IT_MEMORY_CAP, x_time_limit=X_STEP_TIME_LIMIT, run_logger=None):
    if k not in (2, 3):
        raise UnsupportedError(f"The enumerative algorithm handles k in {{2, 3}}, got {k}")
    if q < 1:
        raise ArgumentError("q must be a positive integer")

    started = time.monotonic()
    deadline = started + time_limit
    best, ub, rob_opt, heur = initial_incumbent(inst, k, min(x_time_limit, max(time_limit, 0.0)))
    result = ItResult(ub, best, solved=False, rob_opt=rob_opt, heur=heur)
    logger.info(f"IT k={k}: initial UB {ub:.6f} (min-max {rob_opt:.6f}, heuristic {heur:.6f})")

    def out_of_time(phase):
        if time.monotonic() <= deadline:
            return False
        logger.warning(f"IT stopped at its time limit {phase} with UB {ub:.6f}")
        return True

    while True:
        if out_of_time("before enumeration"):
            return result
        try:
            solutions = inst.enumerate_solutions(ub, method=enumerator, cap=memory_cap)
        except SizeLimitError as e:
            logger.warning(f"IT stopped: {e}")
            return result
        result.stored.append(len(solutions))
        if out_of_time("after enumeration"):
            return result
        cache = BoundCache(inst, k, solutions)
        buckets = build_buckets(inst, solutions, ub, q)
        if out_of_time("while bucketing"):
            return result
        arity = min(k, len(solutions))
        logger.info(f"IT round {result.restarts}: {len(solutions)} solutions, buckets {buckets.sizes}")

        improved = False
        for count, members in enumerate(iterate_tuples(buckets, arity, inst.gamma), start=1):
            if count % TIME_CHECK_INTERVAL == 0 and out_of_time("in the tuple search"):
                return result
            result.enumerated += 1
            t = KTuple(members)
            result.reached_lb1 += 1
            if not below(lb1_tuple(cache, t), ub):
                continue
            result.reached_lb2 += 1
            if not below(lb2_tuple(inst, t), ub):
                continue
            result.reached_cost += 1
            value, _ = cost_of_tuple(inst, t)
            if below(value, ub):
                ub, best = value, t
                result.value, result.tuple = ub, best
                improved = True
                logger.info(f"IT improved UB to {ub:.6f}")
                if run_logger is not None:
                    run_logger.log_event('it_ub', ub, time.monotonic() - started,
                                         {'round': result.restarts})
                break
        if not improved:
            break
        result.restarts += 1

    result.solved = True
    return result
