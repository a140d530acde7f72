"""Combinatorial feasible sets and their oracles.

A ground set knows how to add one copy of its linear description to a
:class:`ModelBuilder`; the shortest-path set additionally offers Dijkstra
and a pruned recursive path enumerator. Enumerators return binary vectors
(``np.int8``) sorted by nominal cost, ties by lexicographic bits.
"""
import logging
import math
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import networkx as nx
import numpy as np

from config.config import ENUM_OUTPUT_CAP
from .errors import ArgumentError, InfeasibleError, SizeLimitError, SolverError
from .lp_core import Sense
from .mip_core import MipStatus, ModelBuilder, enumerate_binary_feasible, solve_mip
from .numerics import below

logger = logging.getLogger(__name__)

ENUMERATORS = ('dfs', 'bfs', 'bnb')


class GroundSet(ABC):
    """A feasible set X of binary vectors of length n"""
    has_deterministic_oracle = False
    has_recursive_enumerator = False

    def __init__(self, n):
        if n < 1:
            raise ArgumentError("A ground set needs at least one item")
        self.n = n

    @abstractmethod
    def add_copy(self, builder):
        """Add one copy of the linear description and return the x indices"""

    def canonicalize(self, bits):
        return np.asarray(bits, dtype=np.int8)

    @abstractmethod
    def contains(self, bits):
        """Whether bits is a member of X"""


class LinearGroundSet(GroundSet):
    """X = {x binary : rows of (matrix, senses, rhs) hold}"""

    def __init__(self, n, matrix, senses, rhs):
        super().__init__(n)
        self.matrix = np.array(matrix, dtype=float).reshape(-1, n)
        self.senses = tuple(Sense(s) for s in senses)
        self.rhs = np.array(rhs, dtype=float).reshape(-1)
        if not (self.matrix.shape[0] == len(self.senses) == self.rhs.shape[0]):
            raise ArgumentError("Rows, senses and right-hand sides must have equal length")

    def add_copy(self, builder):
        x = builder.add_variables(self.n, binary=True)
        for row, sense, rhs in zip(self.matrix, self.senses, self.rhs):
            nz = np.flatnonzero(row)
            builder.add_row(x[nz], row[nz], sense, rhs)
        return x

    def contains(self, bits):
        bits = np.asarray(bits, dtype=float)
        if bits.shape != (self.n,) or np.any((bits != 0) & (bits != 1)):
            return False
        activity = self.matrix @ bits
        for value, sense, rhs in zip(activity, self.senses, self.rhs):
            slack = 1e-9 * max(1.0, abs(rhs))
            if sense == Sense.LE and value > rhs + slack:
                return False
            if sense == Sense.GE and value < rhs - slack:
                return False
            if sense == Sense.EQ and abs(value - rhs) > slack:
                return False
        return True


def selection_ground_set(n, p):
    """Choose exactly p of n items"""
    if not 0 <= p <= n:
        raise ArgumentError(f"Cannot select {p} of {n} items")
    return LinearGroundSet(n, np.ones((1, n)), [Sense.EQ], [p])


@dataclass(frozen=True)
class Graph:
    """Undirected multigraph; edge i is item i"""
    num_vertices: int
    edges: tuple
    s: int
    t: int

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, 'edges', edges)
        if not edges:
            raise ArgumentError("Graph has no edges")
        if self.s == self.t:
            raise ArgumentError("Source and sink must differ")
        for u, v in edges:
            if u == v:
                raise ArgumentError(f"Self-loop at vertex {u}")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise ArgumentError(f"Edge ({u}, {v}) has an endpoint out of range")
        if not (0 <= self.s < self.num_vertices and 0 <= self.t < self.num_vertices):
            raise ArgumentError("Source or sink out of range")
        if not nx.has_path(self.nx_graph, self.s, self.t):
            raise ArgumentError("Sink is not reachable from source")

    @property
    def num_edges(self):
        return len(self.edges)

    @cached_property
    def nx_graph(self):
        g = nx.MultiGraph()
        g.add_nodes_from(range(self.num_vertices))
        for index, (u, v) in enumerate(self.edges):
            g.add_edge(u, v, key=index)
        return g

    @cached_property
    def incidence(self):
        """Per vertex: (edge index, neighbour) in ascending edge order"""
        adjacent = [[] for _ in range(self.num_vertices)]
        for index, (u, v) in enumerate(self.edges):
            adjacent[u].append((index, v))
            adjacent[v].append((index, u))
        return adjacent

    def weight_function(self, weights):
        """Dijkstra weight over parallel edges: the cheapest one"""
        return lambda u, v, keydict: min(weights[key] for key in keydict)


class ShortestPathGroundSet(GroundSet):
    """Simple s-t paths of an undirected graph"""
    has_deterministic_oracle = True
    has_recursive_enumerator = True

    def __init__(self, graph):
        super().__init__(graph.num_edges)
        self.graph = graph

    def add_copy(self, builder):
        """Binary edge selection with two directed unit flows per edge.

        Binary points are an s-t path plus possibly detached components;
        :meth:`canonicalize` strips the latter.
        """
        g = self.graph
        n = self.n
        x = builder.add_variables(n, binary=True)
        forward = builder.add_variables(n, lower=0.0, upper=1.0)
        backward = builder.add_variables(n, lower=0.0, upper=1.0)
        for e in range(n):
            builder.add_row([x[e], forward[e], backward[e]], [1.0, -1.0, -1.0], Sense.EQ, 0.0)

        for w in range(g.num_vertices):
            idx, coefs, incident = [], [], []
            for e, _ in g.incidence[w]:
                u, _v = g.edges[e]
                out_var, in_var = (forward[e], backward[e]) if u == w else (backward[e], forward[e])
                idx.extend([out_var, in_var])
                coefs.extend([1.0, -1.0])
                incident.append(x[e])
            supply = 1.0 if w == g.s else (-1.0 if w == g.t else 0.0)
            if not incident:
                continue
            builder.add_row(idx, coefs, Sense.EQ, supply)
            degree = 1.0 if w in (g.s, g.t) else 2.0
            builder.add_row(incident, np.ones(len(incident)), Sense.LE, degree)
        return x

    def _selected_subgraph(self, bits):
        sub = nx.MultiGraph()
        for e in np.flatnonzero(bits):
            u, v = self.graph.edges[e]
            sub.add_edge(u, v, key=int(e))
        return sub

    def canonicalize(self, bits):
        """Keep only the connected component that contains s"""
        bits = np.asarray(np.round(bits), dtype=np.int8)
        sub = self._selected_subgraph(bits)
        if self.graph.s not in sub:
            return bits
        component = nx.node_connected_component(sub, self.graph.s)
        kept = np.zeros(self.n, dtype=np.int8)
        for u, v, key in sub.edges(keys=True):
            if u in component:
                kept[key] = 1
        return kept

    def contains(self, bits):
        bits = np.asarray(bits)
        if bits.shape != (self.n,) or np.any((bits != 0) & (bits != 1)):
            return False
        sub = self._selected_subgraph(bits)
        s, t = self.graph.s, self.graph.t
        if s not in sub or t not in sub or not nx.is_connected(sub):
            return False
        if sub.number_of_edges() != sub.number_of_nodes() - 1:
            return False
        return all(deg == (1 if w in (s, t) else 2) for w, deg in sub.degree())


def _sorted_unique(vectors, c_hat):
    seen = {}
    for bits in vectors:
        seen.setdefault(bits.tobytes(), bits)
    return sorted(seen.values(), key=lambda b: (float(c_hat @ b), b.tobytes()))


def _mip_min(gs, weights):
    builder = ModelBuilder()
    x = gs.add_copy(builder)
    builder.set_cost(x, weights)
    result = solve_mip(builder.build())
    if result.status == MipStatus.INFEASIBLE:
        raise InfeasibleError("Ground set has no feasible solution")
    if not result.has_incumbent:
        raise SolverError("Deterministic problem stopped without a solution", result.status.value)
    return gs.canonicalize(result.x[x])


def deterministic_min(gs, weights):
    """Minimize weights @ x over the ground set; returns (value, bits)"""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (gs.n,):
        raise ArgumentError(f"Expected {gs.n} weights, got {weights.shape}")
    if gs.has_deterministic_oracle and np.all(weights >= 0):
        g = gs.graph
        _, path = nx.single_source_dijkstra(g.nx_graph, g.s, g.t, weight=g.weight_function(weights))
        bits = np.zeros(gs.n, dtype=np.int8)
        for u, v in zip(path, path[1:]):
            keys = g.nx_graph[u][v]
            bits[min(keys, key=lambda e: (weights[e], e))] = 1
    else:
        bits = _mip_min(gs, weights)
    return float(weights @ bits), bits


def dijkstra_to_sink(graph, weights):
    """Shortest distance from every vertex to t (inf when unreachable)"""
    weights = np.asarray(weights, dtype=float)
    lengths = nx.single_source_dijkstra_path_length(graph.nx_graph, graph.t,
                                                   weight=graph.weight_function(weights))
    dist = np.full(graph.num_vertices, math.inf)
    for vertex, length in lengths.items():
        dist[vertex] = length
    return dist


def enumerate_paths_under(graph, c_hat, ub, order='dfs', cap=ENUM_OUTPUT_CAP):
    """All simple s-t paths with nominal cost strictly below ub.

    A partial path ending at w is extended only while its cost plus the
    distance from w to t stays below ub.
    """
    if order not in ('dfs', 'bfs'):
        raise ArgumentError(f"Unknown search order '{order}'")
    c_hat = np.asarray(c_hat, dtype=float)
    dist = dijkstra_to_sink(graph, c_hat)
    s, t = graph.s, graph.t
    found = []
    if not below(dist[s], ub):
        return found

    frontier = deque([(s, 0.0, 1 << s, ())])
    take = frontier.pop if order == 'dfs' else frontier.popleft
    while frontier:
        v, cost, visited, path = take()
        if v == t:
            bits = np.zeros(graph.num_edges, dtype=np.int8)
            bits[list(path)] = 1
            found.append(bits)
            if len(found) > cap:
                raise SizeLimitError(f"Path enumeration produced more than {cap} paths", produced=len(found))
            continue
        successors = []
        for e, w in graph.incidence[v]:
            if visited >> w & 1:
                continue
            extended = cost + c_hat[e]
            if below(extended + dist[w], ub):
                successors.append((w, extended, visited | 1 << w, path + (e,)))
        # stack pops last first; keep ascending edge order on expansion
        frontier.extend(reversed(successors) if order == 'dfs' else successors)
    logger.debug(f"{order.upper()} enumerated {len(found)} paths below {ub}")
    return _sorted_unique(found, c_hat)


def enumerate_generic_under(gs, c_hat, ub, cap=ENUM_OUTPUT_CAP):
    """Branch-and-bound enumeration of {x in X : c_hat @ x < ub}"""
    c_hat = np.asarray(c_hat, dtype=float)
    builder = ModelBuilder()
    x = gs.add_copy(builder)
    builder.set_cost(x, c_hat)
    program = builder.build()
    position = np.searchsorted(program.binaries, x)
    raw = enumerate_binary_feasible(program, ub, cap)
    found = []
    for point in raw:
        bits = gs.canonicalize(point[position])
        if below(float(c_hat @ bits), ub):
            found.append(bits)
    return _sorted_unique(found, c_hat)


def enumerate_under(gs, c_hat, ub, method='dfs', cap=ENUM_OUTPUT_CAP):
    if method not in ENUMERATORS:
        raise ArgumentError(f"Unknown enumerator '{method}', expected one of {ENUMERATORS}")
    if method != 'bnb' and gs.has_recursive_enumerator:
        return enumerate_paths_under(gs.graph, c_hat, ub, order=method, cap=cap)
    return enumerate_generic_under(gs, c_hat, ub, cap=cap)
