import dataclasses

import numpy as np
import pytest

import src.local_search as local_search_module
from src.ground_sets import Graph, ShortestPathGroundSet, selection_ground_set
from src.instance_model import BudgetedInstance
from src.mip_core import MipResult, MipStatus


def make_t1(gamma=1.0):
    return BudgetedInstance([1, 2, 3, 4], [4, 3, 2, 1], gamma, selection_ground_set(4, 2))


def make_t2(gamma=1.0):
    # s=0, a=1, b=2, t=3; P1 = s-a-t, P2 = s-b-t
    graph = Graph(4, ((0, 1), (1, 3), (0, 2), (2, 3)), 0, 3)
    return BudgetedInstance([1, 1, 2, 2], [1, 1, 0, 0], gamma, ShortestPathGroundSet(graph))


def bits(n, *items):
    """0-based item list to a bit vector"""
    out = np.zeros(n, dtype=np.int8)
    out[list(items)] = 1
    return out


def random_graph_instance(rng, vertices, gamma, density=0.45, max_cost=20):
    """Small connected random multigraph instance with integer data"""
    while True:
        edges = [(u, v) for u in range(vertices) for v in range(u + 1, vertices) if rng.random() < density]
        if not edges:
            continue
        try:
            graph = Graph(vertices, tuple(edges), 0, vertices - 1)
        except ValueError:
            continue
        c_hat = rng.integers(1, max_cost + 1, size=len(edges)).astype(float)
        d = rng.integers(0, max_cost + 1, size=len(edges)).astype(float)
        return BudgetedInstance(c_hat, d, gamma, ShortestPathGroundSet(graph))


def random_selection_instance(rng, n, p, gamma, max_cost=20):
    c_hat = rng.integers(1, max_cost + 1, size=n).astype(float)
    d = rng.integers(0, max_cost + 1, size=n).astype(float)
    return BudgetedInstance(c_hat, d, gamma, selection_ground_set(n, p))


@pytest.fixture
def t1():
    return make_t1()


@pytest.fixture
def t2():
    return make_t2()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def cold_x_steps_fail(monkeypatch):
    """x-step MIPs without a warm start stop before finding an incumbent"""
    real = local_search_module.solve_mip

    def no_incumbent(program, time_limit=None, warm_start=None, **kwargs):
        if warm_start is None:
            return MipResult(MipStatus.TIME_LIMIT, nodes=1)
        return real(program, time_limit=time_limit, warm_start=warm_start, **kwargs)

    monkeypatch.setattr(local_search_module, 'solve_mip', no_incumbent)


@pytest.fixture
def unproven_warm_x_steps(monkeypatch):
    """Warm-started x-step MIPs keep their incumbent but prove only value - 1"""
    real = local_search_module.solve_mip

    def unproven(program, time_limit=None, warm_start=None, **kwargs):
        result = real(program, time_limit=time_limit, warm_start=warm_start, **kwargs)
        if warm_start is None or not result.has_incumbent:
            return result
        return dataclasses.replace(result, status=MipStatus.TIME_LIMIT, bound=result.value - 1.0)

    monkeypatch.setattr(local_search_module, 'solve_mip', unproven)
