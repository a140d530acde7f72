import itertools
import math

import numpy as np
import pytest

from src.errors import ArgumentError
from src.ground_sets import Graph, ShortestPathGroundSet, selection_ground_set
from src.lp_core import LinearProgram, Sense, solve_lp
from src.mip_core import (
    MipStatus, MixedBinaryProgram, ModelBuilder, enumerate_binary_feasible, solve_mip,
)


def t1_program():
    builder = ModelBuilder()
    x = selection_ground_set(4, 2).add_copy(builder)
    builder.set_cost(x, [1, 2, 3, 4])
    return builder.build()


def test_t1_deterministic_optimum():
    result = solve_mip(t1_program())
    assert result.status == MipStatus.OPTIMAL
    assert result.value == pytest.approx(3.0)
    assert result.x.tolist() == [1, 1, 0, 0]
    assert result.bound <= result.value + 1e-6


def test_integral_polytope_solved_at_root():
    builder = ModelBuilder()
    x = builder.add_variables(3, binary=True, cost=[3.0, 1.0, 2.0])
    builder.add_row(x, [1.0, 1.0, 1.0], Sense.EQ, 1.0)
    result = solve_mip(builder.build())
    assert result.nodes == 1
    assert result.value == pytest.approx(1.0)


def test_cutoff_below_optimum_prunes_everything():
    result = solve_mip(t1_program(), cutoff=2.0)
    assert result.status == MipStatus.OPTIMAL
    assert result.x is None
    assert result.value == math.inf
    assert result.bound == 2.0


def test_infeasible_program():
    builder = ModelBuilder()
    x = builder.add_variables(2, binary=True)
    builder.add_row(x, [1.0, 1.0], Sense.GE, 3.0)
    result = solve_mip(builder.build())
    assert result.status == MipStatus.INFEASIBLE
    assert enumerate_binary_feasible(builder.build()) == []


def test_node_limit_reports_time_limit():
    builder = ModelBuilder()
    x = builder.add_variables(6, binary=True, cost=[-5, -4, -3, -6, -2, -7])
    builder.add_row(x, [3, 2, 4, 5, 1, 6], Sense.LE, 10.5)
    result = solve_mip(builder.build(), node_limit=1)
    assert result.status == MipStatus.TIME_LIMIT
    if result.x is not None:
        assert result.bound <= result.value + 1e-6


def test_warm_start_becomes_incumbent():
    program = t1_program()
    result = solve_mip(program, warm_start=[0, 0, 1, 1], node_limit=1)
    assert result.x is not None
    assert result.value <= 7.0


def test_binary_bounds_validated():
    program = LinearProgram([1.0], np.zeros((0, 1)), (), [], [0.0], [2.0])
    with pytest.raises(ArgumentError):
        MixedBinaryProgram(program, [0])


def test_enumerate_t1_all():
    points = enumerate_binary_feasible(t1_program())
    assert len(points) == 6
    assert all(p.sum() == 2 for p in points)


def test_enumerate_t1_below_six():
    points = {tuple(p) for p in enumerate_binary_feasible(t1_program(), ub=6.0)}
    assert points == {(1, 1, 0, 0), (1, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0)}


def test_shortest_path_flow_is_integral_at_root():
    graph = Graph(4, ((0, 1), (1, 3), (0, 2), (2, 3)), 0, 3)
    builder = ModelBuilder()
    x = ShortestPathGroundSet(graph).add_copy(builder)
    builder.set_cost(x, [1, 1, 2, 2])
    result = solve_mip(builder.build())
    assert result.value == pytest.approx(2.0)
    assert result.x[x].tolist() == [1, 1, 0, 0]


def random_program(rng):
    """Mixed-binary program with a couple of continuous variables"""
    b = int(rng.integers(2, 9))
    c_cont = int(rng.integers(0, 3))
    builder = ModelBuilder()
    xs = builder.add_variables(b, binary=True, cost=rng.integers(-9, 10, size=b))
    ys = builder.add_variables(c_cont, lower=0.0, upper=3.0, cost=rng.integers(-5, 6, size=c_cont))
    for _ in range(int(rng.integers(1, 5))):
        coefs = rng.integers(-5, 6, size=b + c_cont)
        sense = Sense.LE if rng.random() < 0.5 else Sense.GE
        rhs = float(rng.integers(-4, 8))
        builder.add_row(np.concatenate([xs, ys]), coefs, sense, rhs)
    return builder.build()


def exhaustive(program, ub=math.inf):
    """Value of every binary assignment (None when the completion is infeasible)"""
    out = {}
    for assignment in itertools.product([0.0, 1.0], repeat=program.binaries.size):
        lower = program.lp.lower.copy()
        upper = program.lp.upper.copy()
        lower[program.binaries] = assignment
        upper[program.binaries] = assignment
        sol = solve_lp(program.lp, lower, upper)
        if sol.optimal and sol.objective < ub - 1e-9:
            out[tuple(int(a) for a in assignment)] = sol.objective
    return out


@pytest.mark.slow
def test_matches_exhaustive_enumeration(rng):
    for _ in range(300):
        program = random_program(rng)
        values = exhaustive(program)
        result = solve_mip(program)
        if not values:
            assert result.status == MipStatus.INFEASIBLE
            continue
        assert result.status == MipStatus.OPTIMAL
        assert result.value == pytest.approx(min(values.values()), abs=1e-6)

        ub = float(np.median(list(values.values())))
        expected = set(exhaustive(program, ub))
        found = {tuple(int(v) for v in p) for p in enumerate_binary_feasible(program, ub)}
        assert found == expected


def test_warm_start_never_worsens(rng):
    for _ in range(30):
        program = random_program(rng)
        cold = solve_mip(program)
        if cold.x is None:
            continue
        warm = solve_mip(program, warm_start=np.round(cold.x[program.binaries]))
        assert warm.value <= cold.value + 1e-9
