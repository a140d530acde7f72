"""Alternating x-step / alpha-step local search for any k."""
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from config.config import X_STEP_TIME_LIMIT, LS_IMPROVEMENT_TOL
from .errors import ArgumentError, InfeasibleError, SolverError
from .instance_model import KTuple, _prefix_norm, cost_of_tuple
from .lp_core import LinearProgram, Sense, solve_lp
from .mip_core import MipStatus, ModelBuilder, solve_mip

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DualBlock:
    alpha: np.ndarray
    theta: float
    gamma_vec: np.ndarray


@dataclass(frozen=True)
class XStepResult:
    tuple: KTuple
    theta: float
    gamma_vec: np.ndarray
    value: float
    hit_limit: bool = False
    bound: float = -math.inf


@dataclass
class LsState:
    tuple: KTuple = None
    block: DualBlock = None
    value: float = math.inf
    log: list = field(default_factory=list)
    limit_hits: int = 0

    def record(self, step, value, started):
        self.log.append({'step': step, 'value': value, 'time': time.monotonic() - started})


def initial_alpha(k):
    """Weights 2j / (k(k+1)) for j = 1..k"""
    if k < 1:
        raise ArgumentError("k must be at least 1")
    return np.array([2.0 * j / (k * (k + 1)) for j in range(1, k + 1)])


def starting_weights(k, seed):
    """Default weights for seed 0, otherwise a seeded uniform draw from the simplex"""
    if seed == 0:
        return initial_alpha(k)
    return np.random.default_rng(seed).dirichlet(np.ones(k))


def weighted_deviation(inst, alpha, t):
    v = np.zeros(inst.n)
    for a, x in zip(alpha, t):
        v += a * inst.d * x.bits
    return v


def dual_block_for(inst, alpha, t):
    """Optimal (theta, gamma) for fixed weights and tuple"""
    v = weighted_deviation(inst, alpha, t)
    v_sorted = np.sort(v)[::-1]
    if inst.gamma <= 0:
        theta = float(v_sorted[0]) if v_sorted.size else 0.0
    else:
        theta = float(v_sorted[math.ceil(inst.gamma) - 1])
    gamma_vec = np.maximum(v - theta, 0.0)
    value = float(np.dot(alpha, t.nominals)) + _prefix_norm(v_sorted, inst.gamma)
    return DualBlock(np.asarray(alpha, dtype=float), theta, gamma_vec), value


def build_weighted_program(inst, k, norm_alpha, nominal_alpha):
    """k ground-set copies plus (theta, gamma) modelling the Gamma-norm.

    Copy j carries nominal weight ``nominal_alpha[j]``; the norm is taken
    of ``sum_j norm_alpha[j] * d * x_j``. Returns the builder, the x index
    blocks and the indices of deviating items.
    """
    builder = ModelBuilder()
    blocks = [inst.ground.add_copy(builder) for _ in range(k)]
    for j, x in enumerate(blocks):
        builder.set_cost(x, nominal_alpha[j] * inst.c_hat)
    deviating = np.flatnonzero(inst.d > 0)
    theta = builder.add_variables(1, lower=0.0, cost=inst.gamma)[0]
    gammas = builder.add_variables(len(deviating), lower=0.0, cost=1.0)
    for i, g in zip(deviating, gammas):
        idx = [x[i] for x in blocks] + [theta, g]
        coefs = [norm_alpha[j] * inst.d[i] for j in range(k)] + [-1.0, -1.0]
        builder.add_row(idx, coefs, Sense.LE, 0.0)
    return builder, blocks, deviating


def _raise_for(result, what):
    if result.status == MipStatus.INFEASIBLE:
        raise InfeasibleError(f"{what}: ground set has no feasible solution")
    if not result.has_incumbent:
        raise SolverError(f"{what} stopped without an incumbent", result.status.value)


def x_step(inst, alpha, time_limit=X_STEP_TIME_LIMIT, warm_start=None):
    """Best k-tuple for fixed weights alpha"""
    alpha = np.asarray(alpha, dtype=float)
    k = len(alpha)
    builder, blocks, _ = build_weighted_program(inst, k, alpha, alpha)
    program = builder.build()

    warm = None
    if warm_start is not None and warm_start.k == k:
        warm = np.zeros(program.binaries.size)
        position = {int(v): p for p, v in enumerate(program.binaries)}
        for x, block in zip(warm_start, blocks):
            for i, var in enumerate(block):
                warm[position[int(var)]] = x.bits[i]

    result = solve_mip(program, time_limit=time_limit, warm_start=warm)
    _raise_for(result, "x-step")
    hit_limit = result.status == MipStatus.TIME_LIMIT
    if hit_limit:
        logger.warning(f"x-step hit its time limit of {time_limit}s")

    t = KTuple(tuple(inst.solution(inst.ground.canonicalize(result.x[block])) for block in blocks))
    block, value = dual_block_for(inst, alpha, t)
    # a truncated search only certifies its best bound
    bound = result.bound if hit_limit else value
    return XStepResult(t, block.theta, block.gamma_vec, value, hit_limit, bound)


def alpha_step(inst, t):
    """Optimal weights for a fixed tuple; the value equals cost_of_tuple(t)"""
    k = t.k
    deviating = np.flatnonzero(inst.d > 0)
    m = len(deviating)
    # variables: alpha (k), theta, gamma over deviating items
    num = k + 1 + m
    objective = np.concatenate([t.nominals, [inst.gamma], np.ones(m)])
    matrix = np.zeros((1 + m, num))
    matrix[0, :k] = 1.0
    for r, i in enumerate(deviating):
        for j, x in enumerate(t):
            matrix[1 + r, j] = inst.d[i] * x.bits[i]
        matrix[1 + r, k] = -1.0
        matrix[1 + r, k + 1 + r] = -1.0
    lp = LinearProgram(
        objective=objective,
        matrix=matrix,
        senses=[Sense.EQ] + [Sense.LE] * m,
        rhs=np.concatenate([[1.0], np.zeros(m)]),
        lower=np.zeros(num),
        upper=np.concatenate([np.ones(k), np.full(1 + m, math.inf)]),
    )
    sol = solve_lp(lp)
    if not sol.optimal:
        raise SolverError("alpha-step LP failed", sol.status.value)
    alpha = np.clip(sol.x[:k], 0.0, None)
    alpha /= alpha.sum()
    return dual_block_for(inst, alpha, t)


def local_search(inst, k, x_time_limit=X_STEP_TIME_LIMIT, tol=LS_IMPROVEMENT_TOL,
                 alpha0=None, run_logger=None, warm_start=None):
    """Alternate x- and alpha-steps until the value stops improving"""
    if alpha0 is None:
        alpha = initial_alpha(k)
    else:
        alpha = np.asarray(alpha0, dtype=float)
        if alpha.shape != (k,) or np.any(alpha < 0) or abs(alpha.sum() - 1.0) > 1e-9:
            raise ArgumentError("Starting weights must lie on the k-simplex")

    started = time.monotonic()
    state = LsState()
    warm = warm_start
    while True:
        xs = x_step(inst, alpha, x_time_limit, warm)
        state.record('x', xs.value, started)
        if xs.hit_limit:
            state.limit_hits += 1
        block, value = alpha_step(inst, xs.tuple)
        state.record('alpha', value, started)
        if run_logger is not None:
            run_logger.log_event('local_search', value, time.monotonic() - started,
                                 {'alpha': block.alpha.tolist()})

        if value >= state.value - tol:
            break
        state.tuple, state.block, state.value = xs.tuple, block, value
        alpha, warm = block.alpha, xs.tuple
        logger.debug(f"Local search value {value:.6f}")
        if xs.hit_limit:
            logger.info("Continuing after x-step time limit with the improved tuple")

    value, _ = cost_of_tuple(inst, state.tuple)
    state.value = value
    logger.info(f"Local search k={k} finished at {value:.6f} after {len(state.log)} steps")
    return state.tuple, value, state
