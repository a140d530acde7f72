"""Seeded random instances.

Shortest-path instances: |V| points uniform in the unit square, s nearest to
(0, 0), t nearest to (1, 1), an edge between every pair closer than
sqrt(4 ln|V| / |V|), nominal cost ceil(1000 * length) and deviation
ceil(delta * cost) with delta uniform on [0, 1]. Attempt i draws from the
i-th child of ``SeedSequence(seed)``; disconnected draws are retried.
"""
import logging
import math

import networkx as nx
import numpy as np

from config.config import COST_SCALE, GENERATOR_MAX_ATTEMPTS
from .errors import ArgumentError, GenerationError
from .ground_sets import Graph, ShortestPathGroundSet, selection_ground_set
from .instance_model import BudgetedInstance

logger = logging.getLogger(__name__)


def _draw_graph(rng, nodes):
    points = rng.random((nodes, 2))
    s = int(np.argmin(np.linalg.norm(points, axis=1)))
    t = int(np.argmin(np.linalg.norm(points - 1.0, axis=1)))
    radius = math.sqrt(4.0 * math.log(nodes) / nodes)
    edges, lengths = [], []
    for u in range(nodes):
        for v in range(u + 1, nodes):
            dist = float(np.linalg.norm(points[u] - points[v]))
            if dist <= radius:
                edges.append((u, v))
                lengths.append(dist)
    return s, t, edges, np.array(lengths)


def generate_instance(nodes, gamma, seed):
    """Random shortest-path instance; same seed gives the same instance"""
    if nodes < 5:
        raise ArgumentError("Need at least 5 nodes")
    for attempt, child in enumerate(np.random.SeedSequence(seed).spawn(GENERATOR_MAX_ATTEMPTS)):
        rng = np.random.default_rng(child)
        s, t, edges, lengths = _draw_graph(rng, nodes)
        delta = rng.random(len(edges))
        if s == t or not edges:
            continue
        probe = nx.Graph(edges)
        if s not in probe or t not in probe or not nx.has_path(probe, s, t):
            logger.debug(f"Attempt {attempt} disconnected, redrawing")
            continue
        c_hat = np.maximum(1.0, np.ceil(COST_SCALE * lengths))
        d = np.ceil(delta * c_hat)
        graph = Graph(nodes, tuple(edges), s, t)
        logger.info(f"Generated instance with {nodes} nodes, {len(edges)} edges (seed {seed}, attempt {attempt})")
        return BudgetedInstance(c_hat, d, gamma, ShortestPathGroundSet(graph))
    raise GenerationError(f"No connected instance after {GENERATOR_MAX_ATTEMPTS} attempts (seed {seed})")


def generate_selection_instance(n, p, gamma, seed, max_cost=20):
    """Random choose-p-of-n instance with integer data"""
    rng = np.random.default_rng(seed)
    c_hat = rng.integers(1, max_cost + 1, size=n).astype(float)
    d = rng.integers(0, max_cost + 1, size=n).astype(float)
    return BudgetedInstance(c_hat, d, gamma, selection_ground_set(n, p))
