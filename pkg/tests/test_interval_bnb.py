import itertools

import numpy as np
import pytest

import src.interval_bnb as interval_bnb_module
import src.local_search as local_search_module
from conftest import bits, make_t1, random_graph_instance, random_selection_instance
from src.enumerative import solve_it
from src.errors import InvariantError, SizeLimitError, SolverError
from src.generator import generate_instance
from src.instance_model import brute_force_optimum, cost_of_tuple
from src.interval_bnb import (
    bound_from_lines, eval_g, eval_subgradient_bounds, interval_bound, lower_problem_left,
    lower_problem_right, solve_bb2, solve_sub,
)
from src.minmax_baseline import solve_minmax
from src.mip_core import MipResult, MipStatus


def t1_pair(t1):
    return t1.solution(bits(4, 0, 1)), t1.solution(bits(4, 1, 2))


def test_eval_g(t1):
    x, y = t1_pair(t1)
    assert eval_g(t1, x, y, 0.75) == pytest.approx(6.5)
    assert eval_g(t1, x, y, 1.0) == pytest.approx(7.0)
    assert eval_g(t1, x, y, 0.0) == pytest.approx(8.0)


def test_subgradient_bounds(t1):
    x, y = t1_pair(t1)
    assert eval_subgradient_bounds(t1, x, y) == (-5.0, 2.0)


def test_solve_sub_t1(t1):
    assert solve_sub(t1, 0.0).value == pytest.approx(7.0)
    sub = solve_sub(t1, 0.25)
    assert sub.value == pytest.approx(6.5)
    assert cost_of_tuple(t1, sub.pair)[0] == pytest.approx(6.5)


def test_bound_from_lines_crossing():
    bound, alpha = bound_from_lines(0.0, 1.0, 0.0, 0.0, -1.0, 1.0)
    assert alpha == pytest.approx(0.5)
    assert bound == pytest.approx(-0.5)


def test_bound_from_lines_without_crossing():
    bound, alpha = bound_from_lines(0.0, 0.5, 4.0, 2.0, -4.0, -4.0)
    assert alpha == pytest.approx(0.25)
    assert bound == pytest.approx(2.0)


def test_bound_from_lines_rejects_disordered_slopes():
    with pytest.raises(InvariantError):
        bound_from_lines(0.0, 0.5, 1.0, 1.0, 5.0, -5.0)


def test_lower_problems_bound_g(t1):
    left = lower_problem_left(t1, 0.0, 0.5)
    right = lower_problem_right(t1, 0.0, 0.5)
    assert left.slope <= right.slope + 1e-7
    x, y = t1_pair(t1)
    low, up = eval_subgradient_bounds(t1, x, y)
    assert left.value <= eval_g(t1, x, y, 0.0) + 0.5 * low + 1e-7
    assert right.value <= eval_g(t1, x, y, 0.5) - 0.5 * up + 1e-7


def test_t1_and_t2(t1, t2):
    result = solve_bb2(t1, time_limit=60)
    assert result.solved
    assert result.value == pytest.approx(6.5)
    assert cost_of_tuple(t1, result.tuple)[0] == pytest.approx(6.5)
    assert 0.0 <= result.alpha_best <= 0.5
    assert result.gap == 0.0

    result = solve_bb2(t2, time_limit=60)
    assert result.value == pytest.approx(3.0)


def test_interval_bound_is_valid(rng):
    for _ in range(8):
        inst = random_graph_instance(rng, 6, float(rng.integers(1, 4)))
        h0, h_half = solve_sub(inst, 0.0).value, solve_sub(inst, 0.5).value
        interval = interval_bound(inst, 0.0, 0.5, h0, h_half)
        assert 0.0 < interval.alpha_prime < 0.5
        for alpha in np.linspace(0.0, 0.5, 6):
            assert interval.bound <= solve_sub(inst, alpha).value + 1e-6


@pytest.mark.slow
def test_matches_brute_force(rng):
    for _ in range(10):
        inst = (random_graph_instance(rng, 6, float(rng.integers(1, 4))) if rng.random() < 0.5
                else random_selection_instance(rng, 6, 3, float(rng.integers(1, 3))))
        exact, _ = brute_force_optimum(inst, 2)
        result = solve_bb2(inst, time_limit=120)
        assert result.solved
        assert result.value == pytest.approx(exact, abs=1e-6)


def test_candidate_set_only_prunes():
    inst = make_t1()
    result = solve_bb2(inst, time_limit=60, candidate_set=[0.25])
    assert result.value >= 6.5 - 1e-7
    assert result.nodes >= 0


def random_pairs(rng, inst, count):
    solutions = inst.enumerate_solutions()
    pairs = list(itertools.product(solutions, repeat=2))
    picked = rng.choice(len(pairs), size=min(count, len(pairs)), replace=False)
    return [pairs[i] for i in picked]


def test_subgradient_bounds_sandwich_finite_differences(rng):
    step = 1e-6
    for _ in range(10):
        inst = random_graph_instance(rng, 6, float(rng.integers(1, 4)))
        for x, y in random_pairs(rng, inst, 5):
            low, up = eval_subgradient_bounds(inst, x, y)
            for alpha in np.linspace(0.0, 1.0 - step, 7):
                slope = (eval_g(inst, x, y, alpha + step) - eval_g(inst, x, y, alpha)) / step
                assert low - 1e-4 <= slope <= up + 1e-4


def test_g_is_convex_in_alpha(rng):
    for _ in range(10):
        inst = random_selection_instance(rng, 6, 3, float(rng.integers(1, 4)) + 0.5 * rng.integers(0, 2))
        for x, y in random_pairs(rng, inst, 5):
            for a, b in rng.uniform(0.0, 1.0, size=(5, 2)):
                mid = eval_g(inst, x, y, 0.5 * (a + b))
                assert mid <= 0.5 * (eval_g(inst, x, y, a) + eval_g(inst, x, y, b)) + 1e-9


def test_h_at_zero_is_the_min_max_optimum(rng):
    for _ in range(8):
        inst = (random_graph_instance(rng, 6, float(rng.integers(1, 4))) if rng.random() < 0.5
                else random_selection_instance(rng, 6, 3, float(rng.integers(1, 4))))
        assert solve_sub(inst, 0.0).value == pytest.approx(solve_minmax(inst).value, abs=1e-6)


def test_lower_problems_approach_h_on_narrow_intervals(rng):
    width = 1e-7
    for _ in range(6):
        inst = random_selection_instance(rng, 6, 3, float(rng.integers(1, 4)))
        alpha = float(rng.uniform(0.0, 0.5 - width))
        h = solve_sub(inst, alpha).value
        assert lower_problem_left(inst, alpha, alpha + width).value == pytest.approx(h, abs=1e-3)
        h_right = solve_sub(inst, alpha + width).value
        assert lower_problem_right(inst, alpha, alpha + width).value == pytest.approx(h_right, abs=1e-3)


def test_root_gap_is_nonnegative(rng):
    for _ in range(5):
        inst = random_graph_instance(rng, 6, float(rng.integers(1, 4)))
        result = solve_bb2(inst, time_limit=60)
        assert result.root_gap >= 0.0
        assert result.gap == 0.0


def test_unproven_sub_evaluations_leave_run_unsolved(t1, unproven_warm_x_steps):
    result = solve_bb2(t1, time_limit=30, eps_alpha=0.05)
    assert not result.solved
    assert result.value >= 6.5 - 1e-7
    assert cost_of_tuple(t1, result.tuple)[0] == pytest.approx(result.value)
    assert result.gap > 0.0
    assert result.value - result.gap <= 6.5 + 1e-7


@pytest.mark.slow
def test_node_limited_sub_evaluations_report_honest_gaps(rng, monkeypatch):
    real = local_search_module.solve_mip

    def capped(program, time_limit=None, warm_start=None, **kwargs):
        if warm_start is None:
            return real(program, time_limit=time_limit, **kwargs)
        return real(program, time_limit=time_limit, node_limit=3, warm_start=warm_start, **kwargs)

    monkeypatch.setattr(local_search_module, 'solve_mip', capped)
    for _ in range(15):
        inst = random_selection_instance(rng, 7, 3, 2.0)
        exact, _ = brute_force_optimum(inst, 2)
        result = solve_bb2(inst, time_limit=20)
        assert result.value >= exact - 1e-6
        assert result.value - result.gap <= exact + 1e-6
        if result.solved:
            assert result.value == pytest.approx(exact, abs=1e-6)


def test_truncated_lower_problems_fall_back_to_their_bound(t1, monkeypatch):
    monkeypatch.setattr(interval_bnb_module, 'solve_mip',
                        lambda program, time_limit=None: MipResult(MipStatus.TIME_LIMIT, bound=-3.0, nodes=1))
    left = lower_problem_left(t1, 0.0, 0.5, time_limit=1.0)
    assert left.hit_limit and left.value == -3.0
    interval = interval_bound(t1, 0.0, 0.5, 7.0, 6.5, time_limit=1.0)
    assert interval.truncated
    assert interval.bound == -3.0
    assert interval.alpha_prime == 0.25

    result = solve_bb2(t1, time_limit=30, eps_alpha=0.05)
    assert not result.solved
    assert result.gap == pytest.approx(result.value + 3.0)


def test_zero_time_limit_still_returns_a_valid_pair(t1):
    result = solve_bb2(t1, time_limit=0)
    if result.solved:
        assert result.value == pytest.approx(6.5)
    assert cost_of_tuple(t1, result.tuple)[0] == pytest.approx(result.value)
    assert result.value >= 6.5 - 1e-7
    assert result.value - result.gap <= 6.5 + 1e-7


def test_starts_from_min_max_when_heuristic_fails(t1, cold_x_steps_fail):
    result = solve_bb2(t1, time_limit=60)
    assert result.value == pytest.approx(6.5)
    with pytest.raises(SolverError):
        solve_bb2(make_t1(gamma=1.5), time_limit=60)


@pytest.mark.slow
def test_generated_graphs_match_other_exact_methods():
    for nodes, seed in ((8, 0), (9, 1), (10, 2)):
        inst = generate_instance(nodes, 2.0, seed)
        result = solve_bb2(inst, time_limit=600)
        assert result.solved
        assert result.value == pytest.approx(solve_it(inst, 2, time_limit=600).value, abs=1e-6)
        try:
            exact, _ = brute_force_optimum(inst, 2)
        except SizeLimitError:
            continue
        assert result.value == pytest.approx(exact, abs=1e-6)
