"""Standard graph families and random corpora.

Vertex labels are fixed per family so that serialized graphs are stable:

* path: 0 - 1 - ... - (V-1)
* cycle_graph: path plus the closing edge (V-1, 0)
* star: centre 0, leaves 1..n
* wheel: hub 0, rim 1..n in cyclic order; spokes first, then rim edges
* pumpkin chains: vertices 0..V-1 along the chain, parallel edges adjacent
* lollipop: loop at 0, pendant edge 0 -> 1
* stower: centre 0, loops first, then star edges to 1..m
"""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import BadParameter
from .graph_core import CombinatorialGraph, count_components
from .metric_graph import Edge, MetricGraph


def _positive_int(name, n, minimum=1):
    if int(n) != n or n < minimum:
        raise BadParameter(f"{name} must be an integer >= {minimum}, got {n}")
    return int(n)


def _positive_lengths(lengths):
    try:
        ls = [float(x) for x in lengths]
    except (TypeError, ValueError):
        raise BadParameter(f"lengths must be numbers, got {lengths!r}") from None
    if not ls or any(not (x > 0) for x in ls):
        raise BadParameter("lengths must be positive")
    return ls


# ---------------------------------------------------------------------------
# combinatorial families


def path(V: int) -> CombinatorialGraph:
    V = _positive_int("V", V)
    return CombinatorialGraph(V, tuple((i, i + 1) for i in range(V - 1)))


def cycle_graph(n: int) -> CombinatorialGraph:
    n = _positive_int("n", n, 3)
    return CombinatorialGraph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete(n: int) -> CombinatorialGraph:
    n = _positive_int("n", n)
    return CombinatorialGraph(n, tuple(combinations(range(n), 2)))


def complete_bipartite(n: int, m: int) -> CombinatorialGraph:
    n = _positive_int("n", n)
    m = _positive_int("m", m)
    return CombinatorialGraph(n + m, tuple((i, n + j) for i in range(n) for j in range(m)))


def star(n: int) -> CombinatorialGraph:
    """Star with n leaves (n + 1 vertices)."""
    n = _positive_int("n", n)
    return CombinatorialGraph(n + 1, tuple((0, i) for i in range(1, n + 1)))


def wheel(n: int) -> CombinatorialGraph:
    """Hub joined to every vertex of an n-cycle: n + 1 vertices, 2n edges."""
    n = _positive_int("n", n, 3)
    spokes = [(0, i) for i in range(1, n + 1)]
    rim = [(i, i % n + 1) for i in range(1, n + 1)]
    return CombinatorialGraph(n + 1, tuple(spokes + rim))


def hypercube(d: int) -> CombinatorialGraph:
    d = _positive_int("d", d)
    edges = [(v, v ^ (1 << b)) for v in range(1 << d) for b in range(d) if v < v ^ (1 << b)]
    return CombinatorialGraph(1 << d, tuple(edges))


def petersen() -> CombinatorialGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return CombinatorialGraph(10, tuple(outer + spokes + inner))


def discrete_pumpkin_chain(counts: Sequence[int]) -> CombinatorialGraph:
    """Path on len(counts) + 1 vertices, the i-th link doubled counts[i] times."""
    counts = [_positive_int("edge count", c) for c in counts]
    edges = [(i, i + 1) for i, c in enumerate(counts) for _ in range(c)]
    return CombinatorialGraph(len(counts) + 1, tuple(edges))


def regular_discrete_pumpkin_chain(eta: int, V: int) -> CombinatorialGraph:
    V = _positive_int("V", V, 2)
    return discrete_pumpkin_chain([eta] * (V - 1))


# ---------------------------------------------------------------------------
# metric families


def metrize(g: CombinatorialGraph, length: float = 1.0) -> MetricGraph:
    return MetricGraph(g.V, tuple(Edge(u, w, float(length)) for u, w in g.edges))


def interval(length: float = 1.0, bc: str = "NN") -> MetricGraph:
    (length,) = _positive_lengths([length])
    bc = bc.upper()
    if len(bc) != 2 or any(c not in "ND" for c in bc):
        raise BadParameter(f"boundary conditions must be two of N/D, got {bc!r}")
    dirichlet = [i for i, c in enumerate(bc) if c == "D"]
    return MetricGraph.from_edges(2, [(0, 1, length)], dirichlet)


def cycle(length: float = 1.0) -> MetricGraph:
    """A single loop at one vertex."""
    (length,) = _positive_lengths([length])
    return MetricGraph.from_edges(1, [(0, 0, length)])


def metric_star(lengths: Sequence[float]) -> MetricGraph:
    ls = _positive_lengths(lengths)
    return MetricGraph.from_edges(len(ls) + 1, [(0, i + 1, l) for i, l in enumerate(ls)])


def pumpkin(lengths) -> MetricGraph:
    """Two vertices joined by parallel edges; an integer gives that many unit edges."""
    if isinstance(lengths, (int, np.integer)):
        lengths = [1.0] * _positive_int("edge count", lengths)
    ls = _positive_lengths(lengths)
    return MetricGraph.from_edges(2, [(0, 1, l) for l in ls])


def pumpkin_chain(slice_counts: Sequence[int], lengths) -> MetricGraph:
    """Pumpkins in a row; ``lengths`` is one value per edge or a single common value."""
    counts = [_positive_int("slice count", c) for c in slice_counts]
    total = sum(counts)
    if np.isscalar(lengths):
        lengths = [lengths] * total
    ls = _positive_lengths(lengths)
    if len(ls) != total:
        raise BadParameter(f"expected {total} lengths, got {len(ls)}")
    edges, it = [], iter(ls)
    for i, c in enumerate(counts):
        edges += [(i, i + 1, next(it)) for _ in range(c)]
    return MetricGraph.from_edges(len(counts) + 1, edges)


def regular_pumpkin_chain(eta: int, pumpkins: int, total_length: float) -> MetricGraph:
    """``pumpkins`` pumpkins of ``eta`` equal edges each, total length as given."""
    eta = _positive_int("eta", eta)
    pumpkins = _positive_int("pumpkins", pumpkins)
    (total_length,) = _positive_lengths([total_length])
    return pumpkin_chain([eta] * pumpkins, total_length / (eta * pumpkins))


def flower(lengths: Sequence[float]) -> MetricGraph:
    ls = _positive_lengths(lengths)
    return MetricGraph.from_edges(1, [(0, 0, l) for l in ls])


def stower(loops: Sequence[float], star_edges: Sequence[float]) -> MetricGraph:
    loops = _positive_lengths(loops) if len(loops) else []
    star_edges = _positive_lengths(star_edges) if len(star_edges) else []
    if not loops and not star_edges:
        raise BadParameter("a stower needs at least one edge")
    edges = [(0, 0, l) for l in loops] + [(0, i + 1, l) for i, l in enumerate(star_edges)]
    return MetricGraph.from_edges(len(star_edges) + 1, edges)


def lollipop(loop_length: float, pendant: float) -> MetricGraph:
    loop_length, pendant = _positive_lengths([loop_length, pendant])
    return MetricGraph.from_edges(2, [(0, 0, loop_length), (0, 1, pendant)])


def pumpkin_dumbbell(k: int, handle: float, total_length: float = 1.0) -> MetricGraph:
    """Two k-edge pumpkins joined by a handle edge (vertices 0-1 | 1-2 handle | 2-3)."""
    k = _positive_int("k", k)
    handle, total_length = _positive_lengths([handle, total_length])
    if handle >= total_length:
        raise BadParameter("handle must be shorter than the total length")
    e = (total_length - handle) / (2 * k)
    edges = [(0, 1, e)] * k + [(1, 2, handle)] + [(2, 3, e)] * k
    return MetricGraph.from_edges(4, edges)


def symmetric_necklace(cells, end_loops: Sequence[float] = (0.0, 0.0)) -> MetricGraph:
    """2-pumpkin chain whose two slices in each cell share a length.

    ``cells`` is a list of slice lengths or an integer count of unit cells.
    A positive entry of ``end_loops`` attaches a loop of that length at the
    corresponding end of the chain.
    """
    if isinstance(cells, (int, np.integer)):
        cells = [1.0] * _positive_int("cells", cells)
    ls = _positive_lengths(cells)
    edges = []
    for i, l in enumerate(ls):
        edges += [(i, i + 1, l), (i, i + 1, l)]
    first, last = (float(x) for x in end_loops)
    if first < 0 or last < 0:
        raise BadParameter("loop lengths cannot be negative")
    if first > 0:
        edges.append((0, 0, first))
    if last > 0:
        edges.append((len(ls), len(ls), last))
    return MetricGraph.from_edges(len(ls) + 1, edges)


# ---------------------------------------------------------------------------
# random corpora


def random_connected_pairs(rng: np.random.Generator, V: int, E: int, loops: bool = False,
                           multi: bool = True) -> list[tuple[int, int]]:
    """Random spanning tree plus extra random edges."""
    if E < V - 1:
        raise BadParameter("need at least V - 1 edges")
    order = rng.permutation(V)
    pairs = [(int(order[i]), int(order[rng.integers(0, i)])) for i in range(1, V)]
    existing = {tuple(sorted(p)) for p in pairs}
    attempts = 0
    while len(pairs) < E:
        attempts += 1
        if attempts > 10000:
            raise BadParameter("could not place the requested number of edges")
        u, w = (int(x) for x in rng.integers(0, V, size=2))
        if u == w and not loops:
            continue
        if not multi and tuple(sorted((u, w))) in existing:
            continue
        existing.add(tuple(sorted((u, w))))
        pairs.append((u, w))
    return pairs


def random_multigraph(rng: np.random.Generator, V: int, E: int, simple: bool = False) -> CombinatorialGraph:
    return CombinatorialGraph(V, tuple(random_connected_pairs(rng, V, E, loops=False, multi=not simple)))


def random_simple_graph(rng: np.random.Generator, V: int, extra: float = 0.4) -> CombinatorialGraph:
    max_e = V * (V - 1) // 2
    E = int(rng.integers(V - 1, max(V - 1, int(V - 1 + extra * (max_e - V + 1))) + 1))
    return random_multigraph(rng, V, E, simple=True)


def random_tree(rng: np.random.Generator, V: int) -> CombinatorialGraph:
    return random_multigraph(rng, V, V - 1)


def random_metric_graph(rng: np.random.Generator, max_edges: int = 10, length_range=(0.2, 2.0),
                        loops: bool = True, dirichlet_probability: float = 0.3) -> MetricGraph:
    """Connected metric graph with random topology, lengths and Dirichlet set."""
    E = int(rng.integers(1, max_edges + 1))
    V = int(rng.integers(1, E + 2))
    if V == 1 and not loops:
        V = 2
    pairs = random_connected_pairs(rng, V, E, loops=loops or V == 1)
    ls = rng.uniform(*length_range, size=E)
    dirichlet = []
    if rng.random() < dirichlet_probability:
        count = int(rng.integers(1, V + 1))
        dirichlet = sorted(int(v) for v in rng.choice(V, size=count, replace=False))
    mg = MetricGraph.from_edges(V, [(u, w, l) for (u, w), l in zip(pairs, ls)], dirichlet)
    assert count_components(V, pairs) == 1
    return mg


def random_metric_tree(rng: np.random.Generator, V: int, length_range=(0.2, 2.0)) -> MetricGraph:
    g = random_tree(rng, V)
    ls = rng.uniform(*length_range, size=g.E)
    return MetricGraph.from_edges(V, [(u, w, l) for (u, w), l in zip(g.edges, ls)])
