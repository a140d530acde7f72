"""Benchmark harness: run (instance, algorithm) cells and report them as CSV."""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from config.config import BENCH_TIME_LIMIT, IT_DEFAULT_Q, KADAPT_THREADS, WITNESS_TOL, X_STEP_TIME_LIMIT
from .enumerative import solve_it
from .errors import ArgumentError, InvariantError
from .ground_sets import ENUMERATORS
from .instance_model import KTuple, brute_force_optimum, cost_of_tuple
from .interval_bnb import solve_bb2
from .local_search import local_search, starting_weights
from .minmax_baseline import solve_minmax

logger = logging.getLogger(__name__)

ALGORITHMS = ('minmax', 'heur', 'bb2', 'it', 'brute')
REPORT_COLUMNS = ['instance', 'algo', 'k', 'gamma', 'value', 'time_ms', 'solved', 'nodes', 'tuples', 'cost_red']


@dataclass(frozen=True)
class RunSpec:
    algorithm: str
    k: int = 2
    gamma: float = None
    time_limit: float = BENCH_TIME_LIMIT
    seed: int = 0
    enumerator: str = 'dfs'
    q: int = IT_DEFAULT_Q

    def validate(self):
        if self.algorithm not in ALGORITHMS:
            raise ArgumentError(f"Unknown algorithm '{self.algorithm}', expected one of {ALGORITHMS}")
        if self.k < 1:
            raise ArgumentError("k must be at least 1")
        if self.algorithm == 'bb2' and self.k != 2:
            raise ArgumentError("bb2 requires k=2")
        if self.algorithm == 'it' and self.k not in (2, 3):
            raise ArgumentError("it requires k in {2, 3}")
        if self.enumerator not in ENUMERATORS:
            raise ArgumentError(f"Unknown enumerator '{self.enumerator}'")
        if self.q < 1:
            raise ArgumentError("q must be a positive integer")
        return self


@dataclass
class RunRecord:
    instance: str
    algo: str
    k: int
    gamma: float
    value: float = math.nan
    time_ms: int = 0
    solved: str = 'false'
    nodes: int = 0
    tuples: int = 0
    cost_red: float = math.nan
    witness: KTuple = field(default=None, repr=False)
    error: str = None

    def to_row(self):
        return {column: getattr(self, column) for column in REPORT_COLUMNS}


def cost_reduction(rob_opt, value):
    """Percent improvement of value over the min-max optimum"""
    if not (rob_opt > 0) or not math.isfinite(value):
        return math.nan
    return 100.0 * (rob_opt - value) / rob_opt


class BenchmarkRunner:
    def __init__(self, threads=KADAPT_THREADS, x_time_limit=X_STEP_TIME_LIMIT):
        self.threads = max(1, threads)
        self.x_time_limit = x_time_limit

    def _dispatch(self, inst, spec, run_logger=None):
        """Returns (value, witness, solved, nodes, tuples)"""
        if spec.algorithm == 'minmax':
            result = solve_minmax(inst)
            return result.value, KTuple((result.solution,)), True, len(result.breakdown), 0
        if spec.algorithm == 'heur':
            t, value, state = local_search(inst, spec.k, min(self.x_time_limit, spec.time_limit),
                                        alpha0=starting_weights(spec.k, spec.seed), run_logger=run_logger)
            return value, t, state.limit_hits == 0, len(state.log), 0
        if spec.algorithm == 'bb2':
            result = solve_bb2(inst, time_limit=spec.time_limit,
                               x_time_limit=min(self.x_time_limit, spec.time_limit), run_logger=run_logger)
            return result.value, result.tuple, result.solved, result.nodes, result.evaluations
        if spec.algorithm == 'it':
            result = solve_it(inst, spec.k, q=spec.q, time_limit=spec.time_limit, enumerator=spec.enumerator,
                              x_time_limit=min(self.x_time_limit, spec.time_limit), run_logger=run_logger)
            return result.value, result.tuple, result.solved, len(result.stored), result.enumerated
        value, t = brute_force_optimum(inst, spec.k)
        return value, t, True, 0, 0

    def rob_opt(self, inst):
        try:
            return solve_minmax(inst).value
        except ArgumentError:
            return math.nan

    def run_cell(self, instance_id, inst, spec, rob_opt=None, run_logger=None):
        """Run one cell; failures come back as records with solved='error'"""
        if spec.gamma is not None:
            inst = inst.with_gamma(spec.gamma)
        record = RunRecord(instance_id, spec.algorithm, spec.k, float(inst.gamma))
        started = time.perf_counter()
        try:
            spec.validate()
            value, witness, solved, nodes, tuples = self._dispatch(inst, spec, run_logger)
            record.time_ms = int(round(1000 * (time.perf_counter() - started)))
            check, _ = cost_of_tuple(inst, witness)
            if abs(check - value) > WITNESS_TOL * max(1.0, abs(value)):
                raise InvariantError(f"Reported value {value} does not match its witness ({check})")
            if rob_opt is None:
                rob_opt = self.rob_opt(inst)
            record.value = float(value)
            record.witness = witness
            record.solved = 'true' if solved else 'false'
            record.nodes, record.tuples = int(nodes), int(tuples)
            record.cost_red = cost_reduction(rob_opt, value)
            logger.info(f"{instance_id} {spec.algorithm} k={spec.k}: {value:.6f} in {record.time_ms} ms")
        except Exception as e:
            record.time_ms = int(round(1000 * (time.perf_counter() - started)))
            record.solved = 'error'
            record.error = f"{type(e).__name__}: {e}"
            logger.error(f"Error in cell {instance_id}/{spec.algorithm}/k={spec.k}: {e}")
        return record

    def run_matrix(self, instances, specs):
        """Every (instance, spec) cell; one record per cell in grid order"""
        cells = [(iid, inst, spec) for iid, inst in instances.items() for spec in specs]
        if not cells:
            return []
        rob_opts = {}
        for iid, inst in instances.items():
            if any(spec.gamma is None for spec in specs):
                rob_opts[iid] = self.rob_opt(inst)

        def run(cell):
            iid, inst, spec = cell
            return self.run_cell(iid, inst, spec, rob_opts.get(iid) if spec.gamma is None else None)

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(run, cells))


def records_to_frame(records):
    return pd.DataFrame([r.to_row() for r in records], columns=REPORT_COLUMNS)


def write_report(records, path):
    frame = records if isinstance(records, pd.DataFrame) else records_to_frame(records)
    frame.to_csv(path, index=False, columns=REPORT_COLUMNS)
    return path


def read_report(path):
    return pd.read_csv(path, dtype={'instance': str, 'algo': str, 'solved': str}, float_precision='round_trip')


def aggregate(frame, time_limit=BENCH_TIME_LIMIT):
    """Per (algo, k, gamma): time mean/std (unsolved at the limit), % solved, mean cost_red"""
    columns = ['algo', 'k', 'gamma', 'cells', 'time_mean_s', 'time_std_s', 'pct_solved',
               'cost_red_mean', 'nodes_mean', 'tuples_mean']
    if frame.empty:
        return pd.DataFrame(columns=columns)
    frame = frame.copy()
    solved = frame['solved'] == 'true'
    frame['time_s'] = np.where(solved, frame['time_ms'] / 1000.0, time_limit)
    frame['is_solved'] = solved.astype(float) * 100.0
    grouped = frame.groupby(['algo', 'k', 'gamma'], sort=True)
    summary = grouped.agg(
        cells=('instance', 'size'),
        time_mean_s=('time_s', 'mean'),
        time_std_s=('time_s', 'std'),
        pct_solved=('is_solved', 'mean'),
        cost_red_mean=('cost_red', 'mean'),
        nodes_mean=('nodes', 'mean'),
        tuples_mean=('tuples', 'mean'),
    ).reset_index()
    summary['time_std_s'] = summary['time_std_s'].fillna(0.0)
    return summary[columns]
