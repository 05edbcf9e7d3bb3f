"""Combinatorial multigraphs and their Laplacian matrices.

Multi-edges are stored as repeated vertex pairs; loops are rejected. Every
graph is connected (checked on construction with union-find).
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import Disconnected, GraphError, HasLoops, IsolatedVertex, NonSymmetric, SingleVertex


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True

    def components(self) -> int:
        return len({self.find(x) for x in range(len(self.parent))})


def count_components(n: int, pairs: Iterable[tuple[int, int]]) -> int:
    uf = UnionFind(n)
    for u, w in pairs:
        uf.union(u, w)
    return uf.components()


@dataclass(frozen=True)
class CombinatorialGraph:
    """Finite connected loopless multigraph on vertices ``0..V-1``.

    The order of each pair fixes the orientation used by
    :func:`incidence_matrix`; the Laplacian does not depend on it.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        V = int(self.vertex_count)
        if V < 1:
            raise GraphError("a graph needs at least one vertex")
        edges = tuple((int(u), int(w)) for u, w in self.edges)
        for u, w in edges:
            if not (0 <= u < V and 0 <= w < V):
                raise GraphError(f"edge ({u}, {w}) references a missing vertex")
            if u == w:
                raise HasLoops(f"loop at vertex {u}")
        if count_components(V, edges) != 1:
            raise Disconnected("combinatorial graph is not connected")
        object.__setattr__(self, "vertex_count", V)
        object.__setattr__(self, "edges", edges)

    @property
    def V(self) -> int:
        return self.vertex_count

    @property
    def E(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.V, dtype=int)
        for u, w in self.edges:
            deg[u] += 1
            deg[w] += 1
        return deg

    def multiplicities(self) -> Counter:
        return Counter(tuple(sorted(e)) for e in self.edges)

    def is_simple(self) -> bool:
        return all(m == 1 for m in self.multiplicities().values())

    def is_complete(self) -> bool:
        """Simple graph with every pair of vertices adjacent."""
        mult = self.multiplicities()
        return self.is_simple() and len(mult) == self.V * (self.V - 1) // 2

    def is_cycle(self) -> bool:
        """Every vertex has degree two (includes the two-edge pumpkin)."""
        return self.V >= 2 and bool(np.all(self.degrees() == 2))

    def is_tree(self) -> bool:
        return self.E == self.V - 1

    def is_bipartite(self) -> bool:
        adj = self.adjacency_lists()
        colour = [-1] * self.V
        colour[0] = 0
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if colour[w] < 0:
                    colour[w] = 1 - colour[v]
                    queue.append(w)
                elif colour[w] == colour[v]:
                    return False
        return True

    def adjacency_lists(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.V)]
        for u, w in self.edges:
            adj[u].append(w)
            adj[w].append(u)
        return adj

    def without_edge(self, index: int) -> "CombinatorialGraph":
        edges = self.edges[:index] + self.edges[index + 1:]
        return CombinatorialGraph(self.V, edges)


def incidence_matrix(g: CombinatorialGraph) -> np.ndarray:
    """Signed V x E incidence matrix: +1 at the initial vertex, -1 at the terminal one."""
    inc = np.zeros((g.V, g.E))
    for j, (u, w) in enumerate(g.edges):
        inc[u, j] = 1.0
        inc[w, j] = -1.0
    return inc


def laplacian_matrix(g: CombinatorialGraph) -> np.ndarray:
    lap = np.zeros((g.V, g.V))
    for u, w in g.edges:
        lap[u, u] += 1.0
        lap[w, w] += 1.0
        lap[u, w] -= 1.0
        lap[w, u] -= 1.0
    return lap


def normalized_laplacian_matrix(g: CombinatorialGraph) -> np.ndarray:
    deg = g.degrees()
    if np.any(deg == 0):
        raise IsolatedVertex(f"vertex {int(np.argmin(deg))} has degree 0")
    scale = 1.0 / np.sqrt(deg)
    return laplacian_matrix(g) * scale[:, None] * scale[None, :]


@dataclass(frozen=True)
class DiscreteSpectrum:
    eigenvalues: tuple[float, ...]
    matrix_kind: str = "Laplacian"

    def __getitem__(self, i):
        return self.eigenvalues[i]

    def __len__(self):
        return len(self.eigenvalues)


def symmetric_eigenvalues(m, kind: str = "Laplacian", rtol: float = 1e-12) -> DiscreteSpectrum:
    """All eigenvalues of a real symmetric matrix, nondecreasing."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSymmetric("matrix must be square")
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if np.abs(m - m.T).max(initial=0.0) > rtol * scale:
        raise NonSymmetric("matrix is not symmetric")
    vals = np.linalg.eigvalsh(0.5 * (m + m.T))
    return DiscreteSpectrum(tuple(float(x) for x in vals), kind)


def laplacian_spectrum(g: CombinatorialGraph) -> DiscreteSpectrum:
    return symmetric_eigenvalues(laplacian_matrix(g), "Laplacian")


def normalized_spectrum(g: CombinatorialGraph) -> DiscreteSpectrum:
    return symmetric_eigenvalues(normalized_laplacian_matrix(g), "NormalizedLaplacian")


def spectral_gap(g: CombinatorialGraph) -> float:
    if g.V < 2:
        raise SingleVertex("spectral gap needs at least two vertices")
    return laplacian_spectrum(g)[1]


def normalized_gap(g: CombinatorialGraph) -> float:
    if g.V < 2:
        raise SingleVertex("spectral gap needs at least two vertices")
    return normalized_spectrum(g)[1]


def betti_number(g: CombinatorialGraph) -> int:
    return g.E - g.V + 1


def _max_flow(n: int, capacity: np.ndarray, s: int, t: int) -> int:
    # Edmonds-Karp on an integer capacity matrix.
    residual = capacity.copy()
    flow = 0
    while True:
        parent = [-1] * n
        parent[s] = s
        queue = deque([s])
        while queue and parent[t] < 0:
            v = queue.popleft()
            for w in np.nonzero(residual[v] > 0)[0]:
                if parent[w] < 0:
                    parent[w] = v
                    queue.append(w)
        if parent[t] < 0:
            return flow
        bottleneck = None
        w = t
        while w != s:
            v = parent[w]
            bottleneck = residual[v, w] if bottleneck is None else min(bottleneck, residual[v, w])
            w = v
        w = t
        while w != s:
            v = parent[w]
            residual[v, w] -= bottleneck
            residual[w, v] += bottleneck
            w = v
        flow += bottleneck


def multigraph_edge_connectivity(n: int, pairs: Sequence[tuple[int, int]]) -> int:
    """Minimum number of edges whose removal disconnects a connected multigraph.

    Loops are ignored (deleting a loop never disconnects). Uses max-flow from
    vertex 0 to every other vertex with one unit of capacity per parallel edge.
    """
    if n < 2:
        raise SingleVertex("edge connectivity needs at least two vertices")
    cap = np.zeros((n, n), dtype=np.int64)
    for u, w in pairs:
        if u != w:
            cap[u, w] += 1
            cap[w, u] += 1
    return int(min(_max_flow(n, cap, 0, t) for t in range(1, n)))


def edge_connectivity_bruteforce(n: int, pairs: Sequence[tuple[int, int]]) -> int:
    """Exhaustive search over edge subsets; only for small graphs."""
    if n < 2:
        raise SingleVertex("edge connectivity needs at least two vertices")
    pairs = [p for p in pairs if p[0] != p[1]]
    for size in range(len(pairs) + 1):
        for removed in combinations(range(len(pairs)), size):
            drop = set(removed)
            kept = [p for i, p in enumerate(pairs) if i not in drop]
            if count_components(n, kept) > 1:
                return size
    raise GraphError("graph cannot be disconnected")


def edge_connectivity(g: CombinatorialGraph, exhaustive: bool = False) -> int:
    if g.V < 2:
        raise SingleVertex("edge connectivity is undefined on a single vertex")
    if exhaustive:
        return edge_connectivity_bruteforce(g.V, g.edges)
    return multigraph_edge_connectivity(g.V, g.edges)


def graph_from_json(obj: dict) -> CombinatorialGraph:
    return CombinatorialGraph(int(obj["vertices"]), tuple(tuple(e) for e in obj["edges"]))


def graph_to_json(g: CombinatorialGraph) -> dict:
    return {"vertices": g.V, "edges": [list(e) for e in g.edges]}
