"""Mixed-binary branch-and-bound over the dense simplex.

Every MIP in the suite (x-steps, SUB(alpha), the interval lower problems,
generic ground-set minimization and enumeration) is assembled with
:class:`ModelBuilder` and solved by :func:`solve_mip`.

Cutoff convention: when a finite ``cutoff`` is given and every node is pruned
by it, the result has status ``OPTIMAL`` with ``x is None``, ``value = inf``
and ``bound = cutoff`` (no solution strictly better than the cutoff exists).
Node limits are reported as ``TIME_LIMIT``.
"""
import heapq
import logging
import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from config.config import MIP_INT_TOL, MIP_GAP_TOL, MIP_NODE_LIMIT, ENUM_OUTPUT_CAP
from .errors import ArgumentError, SizeLimitError, SolverError
from .lp_core import LinearProgram, LpStatus, Sense, solve_lp
from .numerics import below

logger = logging.getLogger(__name__)


class MipStatus(str, Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    TIME_LIMIT = 'time_limit'


@dataclass(frozen=True)
class MixedBinaryProgram:
    lp: LinearProgram
    binaries: np.ndarray

    def __post_init__(self):
        binaries = np.array(self.binaries, dtype=int).reshape(-1)
        binaries.setflags(write=False)
        if binaries.size and (binaries.min() < 0 or binaries.max() >= self.lp.num_vars):
            raise ArgumentError("Binary index out of range")
        if np.any(self.lp.lower[binaries] < 0) or np.any(self.lp.upper[binaries] > 1):
            raise ArgumentError("Binary variables must have bounds within [0, 1]")
        object.__setattr__(self, 'binaries', binaries)


@dataclass(frozen=True)
class MipResult:
    status: MipStatus
    value: float = math.inf
    x: np.ndarray = None
    bound: float = -math.inf
    nodes: int = 0

    @property
    def has_incumbent(self):
        return self.x is not None


class ModelBuilder:
    """Incrementally assemble a mixed-binary program row by row"""

    def __init__(self):
        self._cost = []
        self._lower = []
        self._upper = []
        self._binary = []
        self._rows = []

    @property
    def num_vars(self):
        return len(self._cost)

    def add_variables(self, count, lower=0.0, upper=math.inf, cost=0.0, binary=False):
        """Add ``count`` variables and return their indices"""
        start = len(self._cost)
        if binary:
            lower, upper = 0.0, 1.0
        self._cost.extend(np.broadcast_to(np.asarray(cost, dtype=float), (count,)).tolist())
        self._lower.extend([float(lower)] * count)
        self._upper.extend([float(upper)] * count)
        self._binary.extend([binary] * count)
        return np.arange(start, start + count)

    def set_cost(self, indices, values):
        values = np.broadcast_to(np.asarray(values, dtype=float), (len(indices),))
        for i, v in zip(indices, values):
            self._cost[int(i)] = float(v)

    def add_row(self, indices, coefs, sense, rhs):
        coefs = np.broadcast_to(np.asarray(coefs, dtype=float), (len(indices),))
        self._rows.append((np.asarray(indices, dtype=int), np.array(coefs), Sense(sense), float(rhs)))

    def build_lp(self):
        n = self.num_vars
        matrix = np.zeros((len(self._rows), n))
        for r, (idx, coefs, _, _) in enumerate(self._rows):
            np.add.at(matrix[r], idx, coefs)
        return LinearProgram(
            objective=self._cost,
            matrix=matrix,
            senses=tuple(row[2] for row in self._rows),
            rhs=[row[3] for row in self._rows],
            lower=self._lower,
            upper=self._upper,
        )

    def build(self):
        return MixedBinaryProgram(self.build_lp(), np.flatnonzero(self._binary))


def _relax(p, lower, upper):
    sol = solve_lp(p.lp, lower, upper)
    if sol.status in (LpStatus.UNBOUNDED, LpStatus.NUMERICAL_FAILURE):
        raise SolverError("Relaxation could not be solved", sol.status.value)
    return sol


def _fractional_index(p, x, lower, upper):
    """Most fractional binary (lowest index on ties), or None if integral"""
    if p.binaries.size == 0:
        return None
    values = x[p.binaries]
    frac = np.abs(values - np.round(values))
    frac[lower[p.binaries] == upper[p.binaries]] = 0.0
    j = int(np.argmax(frac))
    if frac[j] <= MIP_INT_TOL:
        return None
    return int(p.binaries[j])


def _snap(p, x):
    x = x.copy()
    x[p.binaries] = np.round(x[p.binaries])
    return x


def _complete(p, bits):
    """LP-complete a warm start given as values of the binaries"""
    lower = p.lp.lower.copy()
    upper = p.lp.upper.copy()
    bits = np.asarray(bits, dtype=float)
    lower[p.binaries] = bits
    upper[p.binaries] = bits
    sol = solve_lp(p.lp, lower, upper)
    if not sol.optimal:
        logger.debug(f"Warm start rejected ({sol.status.value})")
        return None
    x = _snap(p, sol.x)
    return float(p.lp.objective @ x), x


def _pruned(bound, threshold):
    if threshold == math.inf:
        return False
    return bound >= threshold - MIP_GAP_TOL * max(1.0, abs(threshold))


def solve_mip(p, time_limit=None, node_limit=MIP_NODE_LIMIT, warm_start=None, cutoff=math.inf):
    """Best-first branch-and-bound over LP relaxations"""
    start = time.monotonic()
    deadline = math.inf if time_limit is None else start + time_limit

    best_value, best_x = math.inf, None
    if warm_start is not None:
        completed = _complete(p, warm_start)
        if completed is not None:
            best_value, best_x = completed

    root = _relax(p, p.lp.lower, p.lp.upper)
    nodes = 1
    if not root.optimal:
        return MipResult(MipStatus.INFEASIBLE, nodes=nodes)

    heap = [(root.objective, 0, p.lp.lower, p.lp.upper, root.x)]
    seq = 1
    cut_by_cutoff = False
    limited = False

    while heap:
        bound, _, lower, upper, x = heap[0]
        threshold = min(best_value, cutoff)
        if _pruned(bound, threshold):
            cut_by_cutoff = cut_by_cutoff or cutoff < best_value
            heap.clear()
            break
        heapq.heappop(heap)

        j = _fractional_index(p, x, lower, upper)
        if j is None:
            x = _snap(p, x)
            value = float(p.lp.objective @ x)
            if value < best_value:
                best_value, best_x = value, x
                logger.debug(f"New incumbent {value:.6f} after {nodes} nodes")
            continue

        if time.monotonic() > deadline or nodes >= node_limit:
            heapq.heappush(heap, (bound, -1, lower, upper, x))
            limited = True
            break

        for value in (0.0, 1.0):
            child_lower = lower.copy()
            child_upper = upper.copy()
            child_lower[j] = child_upper[j] = value
            child = _relax(p, child_lower, child_upper)
            nodes += 1
            if not child.optimal:
                continue
            if _pruned(child.objective, min(best_value, cutoff)):
                cut_by_cutoff = cut_by_cutoff or cutoff < best_value
                continue
            heapq.heappush(heap, (child.objective, seq, child_lower, child_upper, child.x))
            seq += 1

    if limited:
        open_bound = min(entry[0] for entry in heap)
        logger.warning(f"MIP search stopped at {nodes} nodes with bound {open_bound:.6f}")
        return MipResult(MipStatus.TIME_LIMIT, best_value, best_x, min(open_bound, best_value), nodes)
    if best_x is not None:
        return MipResult(MipStatus.OPTIMAL, best_value, best_x, best_value, nodes)
    if cut_by_cutoff:
        return MipResult(MipStatus.OPTIMAL, math.inf, None, cutoff, nodes)
    return MipResult(MipStatus.INFEASIBLE, nodes=nodes)


def enumerate_binary_feasible(p, ub=math.inf, cap=ENUM_OUTPUT_CAP):
    """Every integral feasible point with objective strictly below ub.

    Returns the binary parts (ordered as ``p.binaries``) in discovery order.
    Only infeasibility and the relaxation bound against ``ub`` prune.
    """
    found = []
    stack = [(p.lp.lower, p.lp.upper)]
    while stack:
        lower, upper = stack.pop()
        sol = _relax(p, lower, upper)
        if not sol.optimal or not below(sol.objective, ub):
            continue
        open_vars = p.binaries[lower[p.binaries] < upper[p.binaries]]
        if open_vars.size == 0:
            found.append(np.round(sol.x[p.binaries]).astype(np.int8))
            if len(found) > cap:
                raise SizeLimitError(f"Enumeration produced more than {cap} solutions", produced=len(found))
            continue
        j = _fractional_index(p, sol.x, lower, upper)
        if j is None:
            j = int(open_vars[0])
        for value in (1.0, 0.0):
            child_lower = lower.copy()
            child_upper = upper.copy()
            child_lower[j] = child_upper[j] = value
            stack.append((child_lower, child_upper))
    logger.debug(f"Enumerated {len(found)} binary points below {ub}")
    return found
