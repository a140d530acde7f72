import math

import numpy as np
import pandas as pd
import pytest

import src.bench as bench_module
from conftest import make_t1
from src.bench import (
    REPORT_COLUMNS, BenchmarkRunner, RunSpec, aggregate, cost_reduction, read_report, records_to_frame,
    write_report,
)
from src.errors import ArgumentError
from src.local_search import initial_alpha


def test_cost_reduction():
    assert cost_reduction(8.0, 6.0) == 25.0
    assert cost_reduction(7.0, 7.0) == 0.0
    assert math.isnan(cost_reduction(0.0, 1.0))
    assert math.isnan(cost_reduction(7.0, math.inf))


def test_spec_validation():
    with pytest.raises(ArgumentError):
        RunSpec('bb2', k=3).validate()
    with pytest.raises(ArgumentError):
        RunSpec('simplex').validate()
    with pytest.raises(ArgumentError):
        RunSpec('it', enumerator='astar').validate()
    assert RunSpec('heur', k=5).validate().k == 5


def test_minmax_cell_has_no_cost_reduction(t1):
    record = BenchmarkRunner(threads=1).run_cell('t1', t1, RunSpec('minmax', k=1))
    assert record.solved == 'true'
    assert record.value == 7.0
    assert record.cost_red == 0.0


def test_cells_for_every_algorithm(t1):
    runner = BenchmarkRunner(threads=1)
    for algo in ('heur', 'bb2', 'it', 'brute'):
        record = runner.run_cell('t1', t1, RunSpec(algo, k=2, time_limit=60))
        assert record.solved == 'true', record.error
        assert record.value <= 7.0 + 1e-7
        assert record.cost_red >= -1e-7
    assert runner.run_cell('t1', t1, RunSpec('it', k=2)).value == pytest.approx(6.5)


def test_error_cell_is_reported_not_raised(t1):
    record = BenchmarkRunner(threads=1).run_cell('t1', t1, RunSpec('it', k=4))
    assert record.solved == 'error'
    assert 'ArgumentError' in record.error
    fractional = BenchmarkRunner(threads=1).run_cell('t1', t1, RunSpec('minmax', k=1, gamma=1.5))
    assert fractional.solved == 'error'


def test_gamma_override(t1):
    record = BenchmarkRunner(threads=1).run_cell('t1', t1, RunSpec('minmax', k=1, gamma=0.0))
    assert record.gamma == 0.0
    assert record.value == 3.0


def test_matrix_order_and_report(t1, t2, tmp_path):
    specs = [RunSpec('minmax', k=1), RunSpec('it', k=2)]
    records = BenchmarkRunner(threads=2).run_matrix({'t1': t1, 't2': t2}, specs)
    assert [(r.instance, r.algo) for r in records] == [('t1', 'minmax'), ('t1', 'it'), ('t2', 'minmax'), ('t2', 'it')]
    path = write_report(records, tmp_path / 'report.csv')
    frame = read_report(path)
    assert list(frame.columns) == REPORT_COLUMNS
    assert frame['solved'].tolist() == ['true'] * 4
    assert frame.loc[1, 'value'] == pytest.approx(6.5)


def test_empty_grid_writes_header_only(tmp_path):
    records = BenchmarkRunner(threads=1).run_matrix({}, [RunSpec('minmax', k=1)])
    assert records == []
    path = write_report(records, tmp_path / 'empty.csv')
    assert path.read_text().strip() == ','.join(REPORT_COLUMNS)


def test_aggregate_charges_unsolved_at_limit():
    frame = pd.DataFrame([
        {'instance': 'a', 'algo': 'it', 'k': 2, 'gamma': 3.0, 'value': 5.0, 'time_ms': 1000,
         'solved': 'true', 'nodes': 2, 'tuples': 10, 'cost_red': 10.0},
        {'instance': 'b', 'algo': 'it', 'k': 2, 'gamma': 3.0, 'value': 6.0, 'time_ms': 9000,
         'solved': 'false', 'nodes': 4, 'tuples': 30, 'cost_red': 20.0},
        {'instance': 'a', 'algo': 'minmax', 'k': 1, 'gamma': 3.0, 'value': 7.0, 'time_ms': 5,
         'solved': 'true', 'nodes': 1, 'tuples': 0, 'cost_red': 0.0},
    ], columns=REPORT_COLUMNS)
    summary = aggregate(frame, time_limit=10.0)
    it = summary[summary['algo'] == 'it'].iloc[0]
    assert it['cells'] == 2
    assert it['time_mean_s'] == pytest.approx(5.5)
    assert it['pct_solved'] == 50.0
    assert it['cost_red_mean'] == 15.0
    minmax = summary[summary['algo'] == 'minmax'].iloc[0]
    assert minmax['time_std_s'] == 0.0
    assert aggregate(records_to_frame([])).empty


def test_witness_is_revalidated(monkeypatch):
    inst = make_t1()
    runner = BenchmarkRunner(threads=1)
    original = runner._dispatch

    def lying(inst, spec, run_logger=None):
        value, witness, solved, nodes, tuples = original(inst, spec, run_logger)
        return value - 1.0, witness, solved, nodes, tuples

    monkeypatch.setattr(runner, '_dispatch', lying)
    record = runner.run_cell('t1', inst, RunSpec('minmax', k=1))
    assert record.solved == 'error'
    assert 'InvariantError' in record.error


def test_report_rewrites_byte_for_byte(t1, t2, tmp_path):
    specs = [RunSpec('minmax', k=1), RunSpec('heur', k=2, time_limit=60), RunSpec('it', k=4)]
    records = BenchmarkRunner(threads=1).run_matrix({'t1': t1, 't2': t2}, specs)
    first = write_report(records, tmp_path / 'first.csv')
    second = write_report(read_report(first), tmp_path / 'second.csv')
    assert first.read_bytes() == second.read_bytes()


def test_seed_picks_the_heuristic_start(t1, monkeypatch):
    starts = []
    real = bench_module.local_search

    def recording(inst, k, x_time_limit, alpha0=None, run_logger=None):
        starts.append(np.asarray(alpha0))
        return real(inst, k, x_time_limit, alpha0=alpha0, run_logger=run_logger)

    monkeypatch.setattr(bench_module, 'local_search', recording)
    runner = BenchmarkRunner(threads=1)
    for seed in (0, 7, 7, 8):
        record = runner.run_cell('t1', t1, RunSpec('heur', k=2, time_limit=60, seed=seed))
        assert record.solved == 'true', record.error
        assert record.value <= 7.0 + 1e-7
    assert starts[0] == pytest.approx(initial_alpha(2))
    assert np.array_equal(starts[1], starts[2])
    assert not np.allclose(starts[1], starts[3])
