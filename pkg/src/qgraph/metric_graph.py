"""Metric graphs: edges with lengths, natural or Dirichlet vertex conditions.

Each edge ``(u, w, length)`` carries the coordinate ``x`` running from 0 at
``u`` to ``length`` at ``w``. Loops (``u == w``) and parallel edges are
allowed. Construction only checks indices; :func:`validate` reports the
remaining structural problems, so that intermediate results of surgery
(which may be disconnected) can still be represented and solved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import GraphError, HasLoops, NoLeaves
from .graph_core import CombinatorialGraph, UnionFind, multigraph_edge_connectivity


@dataclass(frozen=True)
class Edge:
    u: int
    w: int
    length: float

    @property
    def is_loop(self) -> bool:
        return self.u == self.w


@dataclass(frozen=True)
class GraphPoint:
    edge: int
    x: float


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str

    def __str__(self):
        return f"{self.kind}: {self.where}"


@dataclass(frozen=True)
class MetricGraph:
    vertex_count: int
    edges: tuple[Edge, ...]
    dirichlet: frozenset = field(default=frozenset())

    def __post_init__(self):
        V = int(self.vertex_count)
        edges = tuple(e if isinstance(e, Edge) else Edge(int(e[0]), int(e[1]), float(e[2])) for e in self.edges)
        for e in edges:
            if not (0 <= e.u < V and 0 <= e.w < V):
                raise GraphError(f"edge {e} references a missing vertex")
        dirichlet = frozenset(int(v) for v in self.dirichlet)
        for v in dirichlet:
            if not 0 <= v < V:
                raise GraphError(f"Dirichlet vertex {v} does not exist")
        object.__setattr__(self, "vertex_count", V)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "dirichlet", dirichlet)

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable, dirichlet: Iterable[int] = ()) -> "MetricGraph":
        return cls(vertex_count, tuple(Edge(int(u), int(w), float(l)) for u, w, l in edges), frozenset(dirichlet))

    @property
    def V(self) -> int:
        return self.vertex_count

    @property
    def E(self) -> int:
        return len(self.edges)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.edges], dtype=float)

    @property
    def L(self) -> float:
        return total_length(self)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.V, dtype=int)
        for e in self.edges:
            deg[e.u] += 1
            deg[e.w] += 1
        return deg

    def incident(self, v: int) -> list[int]:
        """Edge indices touching ``v``; a loop is listed once."""
        return [j for j, e in enumerate(self.edges) if e.u == v or e.w == v]

    def is_dirichlet(self, v: int) -> bool:
        return v in self.dirichlet

    def with_lengths(self, lengths) -> "MetricGraph":
        edges = tuple(Edge(e.u, e.w, float(l)) for e, l in zip(self.edges, lengths))
        return MetricGraph(self.V, edges, self.dirichlet)

    def scaled(self, c: float) -> "MetricGraph":
        return self.with_lengths(self.lengths * c)

    def has_loops(self) -> bool:
        return any(e.is_loop for e in self.edges)


def component_labels(mg: MetricGraph) -> list[int]:
    uf = UnionFind(mg.V)
    for e in mg.edges:
        uf.union(e.u, e.w)
    roots = [uf.find(v) for v in range(mg.V)]
    relabel: dict[int, int] = {}
    return [relabel.setdefault(r, len(relabel)) for r in roots]


def component_count(mg: MetricGraph) -> int:
    return len(set(component_labels(mg)))


def is_connected(mg: MetricGraph) -> bool:
    return component_count(mg) == 1


def validate(mg: MetricGraph) -> list[Violation]:
    out: list[Violation] = []
    if mg.V < 1:
        out.append(Violation("NoVertices", "graph"))
        return out
    if mg.E == 0:
        out.append(Violation("NoEdges", "graph"))
    for j, e in enumerate(mg.edges):
        if not (np.isfinite(e.length) and e.length > 0):
            out.append(Violation("NonPositiveLength", f"edge {j}"))
    deg = mg.degrees()
    for v in range(mg.V):
        if deg[v] == 0 and mg.E > 0:
            out.append(Violation("IsolatedVertex", f"vertex {v}"))
    if mg.E > 0 and component_count(mg) > 1:
        out.append(Violation("Disconnected", f"{component_count(mg)} components"))
    return out


def total_length(mg: MetricGraph) -> float:
    return float(sum(e.length for e in mg.edges))


def longest_edge(mg: MetricGraph) -> float:
    return float(max(e.length for e in mg.edges))


def shortest_edge(mg: MetricGraph) -> float:
    return float(min(e.length for e in mg.edges))


def betti_number(mg: MetricGraph) -> int:
    return mg.E - mg.V + component_count(mg)


def _removable_vertex(mg: MetricGraph, deg: np.ndarray) -> int | None:
    for v in range(mg.V):
        if deg[v] != 2 or v in mg.dirichlet:
            continue
        inc = mg.incident(v)
        if len(inc) == 2:
            return v
    return None


def suppress_degree_two(mg: MetricGraph) -> MetricGraph:
    """Merge edges through natural degree-two vertices until none remain.

    A vertex whose only edge is a loop is kept, so a cycle becomes one vertex
    carrying a single loop. Dirichlet vertices are never removed.
    """
    while True:
        v = _removable_vertex(mg, mg.degrees())
        if v is None:
            return mg
        j1, j2 = mg.incident(v)
        e1, e2 = mg.edges[j1], mg.edges[j2]
        a = e1.u if e1.w == v else e1.w
        b = e2.w if e2.u == v else e2.u
        merged = Edge(a, b, e1.length + e2.length)
        kept = [e for j, e in enumerate(mg.edges) if j not in (j1, j2)]
        kept.insert(min(j1, j2), merged)

        def shift(x):
            return x - 1 if x > v else x

        edges = tuple(Edge(shift(e.u), shift(e.w), e.length) for e in kept)
        dirichlet = frozenset(shift(x) for x in mg.dirichlet)
        mg = MetricGraph(mg.V - 1, edges, dirichlet)


def bridges(mg: MetricGraph) -> list[int]:
    """Indices of non-loop edges whose deletion increases the component count."""
    base = component_count(mg)
    out = []
    for j, e in enumerate(mg.edges):
        if e.is_loop:
            continue
        uf = UnionFind(mg.V)
        for i, f in enumerate(mg.edges):
            if i != j:
                uf.union(f.u, f.w)
        if uf.components() > base:
            out.append(j)
    return out


def metric_edge_connectivity(mg: MetricGraph) -> int:
    """1 if one interior cut can disconnect the graph, otherwise 2."""
    return 1 if bridges(mg) else 2


def discrete_edge_connectivity(mg: MetricGraph) -> int:
    """Edge connectivity of the degree-two-reduced graph; 2 when it has one vertex."""
    red = suppress_degree_two(mg)
    if red.V == 1:
        return 2
    return multigraph_edge_connectivity(red.V, [(e.u, e.w) for e in red.edges])


def vertex_distances(mg: MetricGraph) -> np.ndarray:
    """All-pairs shortest path lengths between vertices (inf across components)."""
    d = np.full((mg.V, mg.V), np.inf)
    np.fill_diagonal(d, 0.0)
    for e in mg.edges:
        if e.length < d[e.u, e.w]:
            d[e.u, e.w] = d[e.w, e.u] = e.length
    for m in range(mg.V):
        d = np.minimum(d, d[:, m:m + 1] + d[m:m + 1, :])
    return d


def _sum_max(e: Edge, d: np.ndarray, c: int, dd: int) -> float:
    # max over s in [0, l_e] of dist(x_s, c) + dist(x_s, dd); concave piecewise linear in s
    l = e.length

    def dist(s, t):
        return min(s + d[e.u, t], l - s + d[e.w, t])

    cands = [0.0, l]
    for t in (c, dd):
        s = 0.5 * (l + d[e.w, t] - d[e.u, t])
        if 0.0 < s < l:
            cands.append(s)
    return max(dist(s, c) + dist(s, dd) for s in cands)


def metric_diameter(mg: MetricGraph) -> float:
    """Largest distance between any two points, vertices or interior points."""
    if mg.E == 0:
        return 0.0
    d = vertex_distances(mg)
    if not np.all(np.isfinite(d)):
        raise GraphError("diameter of a disconnected graph is infinite")
    best = 0.0
    for i, e in enumerate(mg.edges):
        best = max(best, 0.5 * (d[e.u, e.w] + e.length))
        for j, f in enumerate(mg.edges):
            if j == i:
                continue
            best = max(best, 0.5 * (_sum_max(e, d, f.u, f.w) + f.length))
    return float(best)


def leaves(mg: MetricGraph) -> list[int]:
    deg = mg.degrees()
    return [v for v in range(mg.V) if deg[v] == 1]


def leaf_diameter(mg: MetricGraph) -> float:
    lv = leaves(mg)
    if len(lv) < 2:
        raise NoLeaves("leaf diameter needs at least two degree-one vertices")
    d = vertex_distances(mg)
    return float(max(d[a, b] for a in lv for b in lv))


def underlying_combinatorial(mg: MetricGraph) -> CombinatorialGraph:
    if mg.has_loops():
        raise HasLoops("the metric graph has a loop")
    return CombinatorialGraph(mg.V, tuple((e.u, e.w) for e in mg.edges))


def is_equilateral(mg: MetricGraph, rtol: float = 1e-12) -> bool:
    ls = mg.lengths
    return bool(np.all(np.abs(ls - ls[0]) <= rtol * ls[0]))
