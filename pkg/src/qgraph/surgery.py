"""Graph surgery: edge replacement and deletion, cutting, Dirichlet splitting,
edge doubling and detaching, plus the symmetrization of an eigenfunction's
positive part onto a star with loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import (BadParameter, BadRange, BadSubset, DegreeTooLow, GraphError, NotAnEigenfunction,
                     OutOfRange, WouldDisconnect)
from .graph_core import CombinatorialGraph, count_components, edge_connectivity
from .metric_graph import (Edge, MetricGraph, bridges, component_count, discrete_edge_connectivity, validate)
from .p_laplacian import DiscreteQuotient
from .spectral_solver import Eigenfunction, _solutions_in, edge_extrema, edge_level_points, level_count


def _check_edge(graph, edge: int):
    if not 0 <= edge < len(graph.edges):
        raise GraphError(f"edge {edge} does not exist")


# ---------------------------------------------------------------------------
# combinatorial surgery


def replace_edge_by_path(g: CombinatorialGraph, edge: int, order: Sequence[int] | None = None) -> CombinatorialGraph:
    """Replace an edge by the path through every vertex between its ends in ``order``.

    ``order`` lists all vertices (default ``0..V-1``). If the edge joins the
    vertices at positions i < j, it is removed and the edges between positions
    i, i+1, ..., j are added next to whatever edges already exist.
    """
    _check_edge(g, edge)
    order = list(range(g.V)) if order is None else [int(v) for v in order]
    if sorted(order) != list(range(g.V)):
        raise BadRange("order must list every vertex exactly once")
    pos = {v: i for i, v in enumerate(order)}
    u, w = g.edges[edge]
    i, j = sorted((pos[u], pos[w]))
    if j - i < 2:
        raise BadRange(f"edge {edge} already joins consecutive vertices")
    new = [(order[t], order[t + 1]) for t in range(i, j)]
    edges = g.edges[:edge] + tuple(new) + g.edges[edge + 1:]
    return CombinatorialGraph(g.V, edges)


def delete_edge(g, edge: int):
    """Remove one edge; works on both graph kinds but refuses to disconnect."""
    _check_edge(g, edge)
    if isinstance(g, MetricGraph):
        edges = g.edges[:edge] + g.edges[edge + 1:]
        out = MetricGraph(g.V, edges, g.dirichlet)
        if component_count(out) > component_count(g):
            raise WouldDisconnect(f"deleting edge {edge} disconnects the graph")
        return out
    edges = g.edges[:edge] + g.edges[edge + 1:]
    if count_components(g.V, edges) > 1:
        raise WouldDisconnect(f"deleting edge {edge} disconnects the graph")
    return CombinatorialGraph(g.V, edges)


@dataclass(frozen=True)
class TraceStep:
    operation: str
    graph: CombinatorialGraph
    quotient: float


def reduce_to_pumpkin_chain(g: CombinatorialGraph, f, p: float = 2.0) -> list[TraceStep]:
    """Turn g into an eta-regular pumpkin chain along the ordering by ``f``.

    Each long edge is replaced by a path through the intermediate vertices,
    then surplus parallel edges are deleted until every link carries exactly
    eta edges. The Rayleigh quotient of ``f`` is recorded after every step and
    can only decrease.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (g.V,):
        raise BadParameter("f needs one value per vertex")
    eta = edge_connectivity(g)
    order = [int(v) for v in np.argsort(f, kind="stable")]
    pos = {v: i for i, v in enumerate(order)}
    quotient = DiscreteQuotient(g, p)
    trace = [TraceStep("start", g, quotient(f))]

    def long_edge(h):
        for j, (u, w) in enumerate(h.edges):
            if abs(pos[u] - pos[w]) >= 2:
                return j
        return None

    while (j := long_edge(g)) is not None:
        g = replace_edge_by_path(g, j, order)
        trace.append(TraceStep(f"replace edge {j}", g, DiscreteQuotient(g, p)(f)))

    while True:
        counts: dict[tuple[int, int], list[int]] = {}
        for j, (u, w) in enumerate(g.edges):
            counts.setdefault(tuple(sorted((pos[u], pos[w]))), []).append(j)
        surplus = [idx for idx in counts.values() if len(idx) > eta]
        if not surplus:
            break
        j = surplus[0][-1]
        g = delete_edge(g, j)
        trace.append(TraceStep(f"delete edge {j}", g, DiscreteQuotient(g, p)(f)))
    return trace


# ---------------------------------------------------------------------------
# metric surgery


def _metric(mg: MetricGraph, edges, dirichlet=None, V=None) -> MetricGraph:
    return MetricGraph(mg.V if V is None else V, tuple(edges), mg.dirichlet if dirichlet is None else frozenset(dirichlet))


def cut_edge(mg: MetricGraph, edge: int, x: float) -> MetricGraph:
    """Cut an edge at distance x from its start; both pieces get a new natural leaf."""
    _check_edge(mg, edge)
    e = mg.edges[edge]
    if not 0.0 < x < e.length:
        raise OutOfRange(f"cut point {x} is not inside (0, {e.length})")
    a, b = mg.V, mg.V + 1
    pieces = (Edge(e.u, a, float(x)), Edge(b, e.w, e.length - float(x)))
    edges = mg.edges[:edge] + pieces + mg.edges[edge + 1:]
    return _metric(mg, edges, V=mg.V + 2)


def dirichlet_split(mg: MetricGraph, v: int, edges_d: Sequence[int]) -> MetricGraph:
    """Detach the listed edges from v, giving each a new Dirichlet endpoint."""
    edges_d = [int(j) for j in edges_d]
    if not 0 <= v < mg.V:
        raise BadSubset(f"vertex {v} does not exist")
    if v in mg.dirichlet:
        raise BadSubset(f"vertex {v} already carries a Dirichlet condition")
    if len(set(edges_d)) != len(edges_d):
        raise BadSubset("edges listed twice")
    for j in edges_d:
        if not 0 <= j < mg.E:
            raise BadSubset(f"edge {j} does not exist")
        e = mg.edges[j]
        if e.is_loop:
            raise BadSubset(f"edge {j} is a loop")
        if v not in (e.u, e.w):
            raise BadSubset(f"edge {j} is not incident to vertex {v}")
    if len(edges_d) >= mg.degrees()[v]:
        raise BadSubset("at least one edge must stay attached to the vertex")
    edges = list(mg.edges)
    dirichlet = set(mg.dirichlet)
    new_v = mg.V
    for j in edges_d:
        e = edges[j]
        edges[j] = Edge(new_v, e.w, e.length) if e.u == v else Edge(e.u, new_v, e.length)
        dirichlet.add(new_v)
        new_v += 1
    return _metric(mg, edges, dirichlet, V=new_v)


def split_dirichlet_vertices(mg: MetricGraph) -> MetricGraph:
    """Give every edge end at a Dirichlet vertex its own Dirichlet leaf.

    The Laplacian is unchanged, since a Dirichlet vertex imposes no coupling
    between its edges. Dirichlet vertices left without edges are removed.
    """
    if not mg.dirichlet:
        return mg
    keep = [v for v in range(mg.V) if v not in mg.dirichlet]
    index = {v: i for i, v in enumerate(keep)}
    next_v = len(keep)
    dirichlet = set()
    edges = []
    for e in mg.edges:
        ends = []
        for x in (e.u, e.w):
            if x in mg.dirichlet:
                ends.append(next_v)
                dirichlet.add(next_v)
                next_v += 1
            else:
                ends.append(index[x])
        edges.append(Edge(ends[0], ends[1], e.length))
    return MetricGraph(next_v, tuple(edges), frozenset(dirichlet))


def double_edges(mg: MetricGraph) -> MetricGraph:
    """Every edge followed by a parallel copy of the same length."""
    edges = tuple(x for e in mg.edges for x in (e, Edge(e.u, e.w, e.length)))
    return _metric(mg, edges)


def detach_edge_end(mg: MetricGraph, edge: int, v: int) -> MetricGraph:
    """Move the end of ``edge`` at v to a new natural leaf."""
    _check_edge(mg, edge)
    e = mg.edges[edge]
    if v not in (e.u, e.w):
        raise GraphError(f"edge {edge} does not touch vertex {v}")
    if mg.degrees()[v] < 3:
        raise DegreeTooLow(f"vertex {v} has degree {mg.degrees()[v]} < 3")
    if edge in bridges(mg):
        raise WouldDisconnect(f"edge {edge} is a bridge")
    new = Edge(e.u, mg.V, e.length) if e.w == v else Edge(mg.V, e.w, e.length)
    edges = mg.edges[:edge] + (new,) + mg.edges[edge + 1:]
    return _metric(mg, edges, V=mg.V + 1)


def join_vertices(mg: MetricGraph, a: int, b: int) -> MetricGraph:
    """Identify vertex b with vertex a; the result is Dirichlet if either was."""
    if not (0 <= a < mg.V and 0 <= b < mg.V) or a == b:
        raise BadParameter("join needs two distinct existing vertices")

    def relabel(x):
        x = a if x == b else x
        return x - 1 if x > b else x

    edges = [Edge(relabel(e.u), relabel(e.w), e.length) for e in mg.edges]
    dirichlet = {relabel(x) for x in mg.dirichlet}
    return _metric(mg, edges, dirichlet, V=mg.V - 1)


def attach_pendant(mg: MetricGraph, v: int, length: float, dirichlet: bool = False) -> MetricGraph:
    if not 0 <= v < mg.V:
        raise BadParameter(f"vertex {v} does not exist")
    if not length > 0:
        raise BadParameter("pendant length must be positive")
    d = set(mg.dirichlet) | ({mg.V} if dirichlet else set())
    return _metric(mg, mg.edges + (Edge(v, mg.V, float(length)),), d, V=mg.V + 1)


def lengthen_edge(mg: MetricGraph, edge: int, length: float) -> MetricGraph:
    _check_edge(mg, edge)
    if not length >= mg.edges[edge].length:
        raise BadParameter("the new length must not be shorter")
    lengths = mg.lengths
    lengths[edge] = length
    return mg.with_lengths(lengths)


@dataclass(frozen=True)
class SurgeryOp:
    kind: str
    params: dict = field(default_factory=dict)


_METRIC_OPS = {
    "DeleteEdge": lambda g, p: delete_edge(g, p["edge"]),
    "CutEdge": lambda g, p: cut_edge(g, p["edge"], p["x"]),
    "JoinVertices": lambda g, p: join_vertices(g, p["a"], p["b"]),
    "DirichletSplit": lambda g, p: dirichlet_split(g, p["vertex"], p["edges"]),
    "DoubleEdges": lambda g, p: double_edges(g),
    "AttachPendant": lambda g, p: attach_pendant(g, p["vertex"], p["length"], p.get("dirichlet", False)),
    "DetachEdgeEnd": lambda g, p: detach_edge_end(g, p["edge"], p["vertex"]),
    "LengthenEdge": lambda g, p: lengthen_edge(g, p["edge"], p["length"]),
}

_COMBINATORIAL_OPS = {
    "ReplaceEdgeByPath": lambda g, p: replace_edge_by_path(g, p["edge"], p.get("order")),
    "DeleteEdge": lambda g, p: delete_edge(g, p["edge"]),
}

SURGERY_KINDS = tuple(sorted(set(_METRIC_OPS) | set(_COMBINATORIAL_OPS)))


def apply_op(graph, op: SurgeryOp):
    """Apply one operation and revalidate; cutting and splitting may disconnect."""
    table = _METRIC_OPS if isinstance(graph, MetricGraph) else _COMBINATORIAL_OPS
    if op.kind not in table:
        raise BadParameter(f"operation {op.kind!r} does not apply to this graph kind")
    try:
        out = table[op.kind](graph, op.params)
    except KeyError as exc:
        raise BadParameter(f"{op.kind} is missing parameter {exc}") from None
    if isinstance(out, MetricGraph):
        problems = [v for v in validate(out) if v.kind != "Disconnected"]
        if problems:
            raise GraphError(f"{op.kind} produced an invalid graph: {problems[0]}")
    return out


def apply_script(graph, ops: Sequence[SurgeryOp]):
    for op in ops:
        graph = apply_op(graph, op)
    return graph


# ---------------------------------------------------------------------------
# symmetrization of the positive part of an eigenfunction


def _edge_pieces(psi: Eigenfunction, edge: int, lo: float, hi: float) -> list[tuple[float, float]]:
    """Maximal subintervals of the edge on which lo < psi <= hi."""
    l = psi.graph.edges[edge].length
    amp = math.hypot(*psi.coeffs[edge])
    cuts = {0.0, l}
    for t in (lo, hi):
        # a level within rounding of the amplitude only touches the extremum
        if np.isfinite(t) and abs(t) < amp * (1.0 - 1e-12):
            cuts.update(edge_level_points(psi, edge, t))
    cuts = sorted(cuts)
    out: list[tuple[float, float]] = []
    for x0, x1 in zip(cuts, cuts[1:]):
        if x1 - x0 <= 0.0:
            continue
        val = float(psi(edge, 0.5 * (x0 + x1)))
        if lo + 2e-12 * amp < val <= hi + 2e-12 * amp:
            if out and out[-1][1] == x0:
                out[-1] = (out[-1][0], x1)
            else:
                out.append((x0, x1))
    return out


def _piece_integrals(psi: Eigenfunction, edge: int, x0: float, x1: float) -> tuple[float, float]:
    """(integral of psi^2, integral of psi'^2) over [x0, x1], in closed form."""
    a, b = psi.coeffs[edge]
    k = psi.k
    R2 = a * a + b * b
    phase = math.atan2(b, a)
    osc = (math.sin(2 * (k * x1 - phase)) - math.sin(2 * (k * x0 - phase))) / (2 * k)
    return 0.5 * R2 * ((x1 - x0) + osc), 0.5 * k * k * R2 * ((x1 - x0) - osc)


def level_set_measure(psi: Eigenfunction, lo: float, hi: float) -> float:
    """Total length of the set where lo < psi < hi."""
    return float(sum(x1 - x0 for j in range(psi.graph.E) for x0, x1 in _edge_pieces(psi, j, lo, hi)))


def _region(psi: Eigenfunction, lo: float, hi: float):
    mass = energy = length = 0.0
    pieces = []
    for j in range(psi.graph.E):
        for x0, x1 in _edge_pieces(psi, j, lo, hi):
            m, en = _piece_integrals(psi, j, x0, x1)
            mass += m
            energy += en
            length += x1 - x0
            pieces.append((j, x0, x1))
    return mass, energy, length, pieces


def _negated(psi: Eigenfunction) -> Eigenfunction:
    return Eigenfunction(psi.graph, psi.k, -psi.coeffs)


@dataclass(frozen=True)
class LevelCheck:
    """Smallest level counts on the open ranges where lower bounds on them are known."""

    min_count_full_range: float
    min_count_vertex_range: float
    eta: int

    @property
    def ok(self) -> bool:
        return self.min_count_full_range >= 2 and self.min_count_vertex_range >= self.eta


def _breakpoints(psi: Eigenfunction) -> list[float]:
    vals = list(psi.vertex_values().values())
    vals += [x for j in range(psi.graph.E) for x in edge_extrema(psi, j)]
    return sorted(set(vals))


def _branching_vertices(mg: MetricGraph) -> list[int]:
    # vertices that survive suppression of natural degree-two vertices
    deg = mg.degrees()
    return [v for v in range(mg.V)
            if not (deg[v] == 2 and v not in mg.dirichlet and len(mg.incident(v)) == 2)] or [0]


def check_level_counts(psi: Eigenfunction, eta: int, min_gap: float = 1e-9) -> LevelCheck:
    """Level counts between breakpoints, on (min psi, max psi) and on the vertex value range.

    The vertex range uses only vertices that are not natural degree-two
    vertices, since edge connectivity is measured after suppressing those.
    """
    breaks = _breakpoints(psi)
    values = psi.vertex_values()
    vertex_vals = [values[v] for v in _branching_vertices(psi.graph) if v in values]
    smin, smax = min(vertex_vals), max(vertex_vals)
    scale = max(breaks[-1] - breaks[0], 1e-300)
    full = vert = math.inf
    for s, t in zip(breaks, breaks[1:]):
        if t - s <= min_gap * scale:
            continue
        c = level_count(psi, 0.5 * (s + t))
        full = min(full, c)
        if smin <= s and t <= smax:
            vert = min(vert, c)
    return LevelCheck(full, vert, eta)


@dataclass(frozen=True)
class SymmetrizationResult:
    """Quotients and norms of the positive part before and after symmetrization.

    The star carries ``eta`` equal edges of length ``star_edge_length`` with
    Dirichlet ends; ``loop_lengths`` are the pieces above the cutoff level,
    reattached as loops at the star's centre. ``profile_levels`` and
    ``profile_positions`` sample the rearranged profile on one star edge.
    """

    stower: MetricGraph
    eta: int
    cutoff: float
    star_edge_length: float
    loop_lengths: tuple[float, ...]
    quotient_original: float
    quotient_symmetrized: float
    mass_original: float
    mass_symmetrized: float
    star_mass_closed_form: float
    star_mass_coarea: float
    levels: LevelCheck
    profile_levels: np.ndarray = field(compare=False)
    profile_positions: np.ndarray = field(compare=False)

    @property
    def margin(self) -> float:
        return self.quotient_original - self.quotient_symmetrized


def _chebyshev_quad(fun, a: float, b: float) -> float:
    # t = a + (b - a)(1 - cos s)/2 removes inverse square-root endpoint singularities;
    # fun also receives b - t, computed without cancellation
    half = 0.5 * (b - a)

    def g(s):
        c = math.cos(0.5 * s)
        return fun(a + half * (1.0 - math.cos(s)), 2.0 * half * c * c) * half * math.sin(s)

    val, _ = integrate.quad(g, 0.0, math.pi, epsabs=1e-13, epsrel=1e-11, limit=200)
    return val


def symmetrize_positive_part(mg: MetricGraph, psi: Eigenfunction, eta: int | None = None,
                             tol: float = 1e-7, profile_points: int = 65) -> SymmetrizationResult:
    """Rearrange the positive part of an eigenfunction onto an eta-star with loops.

    The sign is chosen so that the positive set is at most half the graph.
    Below the cutoff level (the largest level with at least ``eta``
    preimages) the function is rearranged onto ``eta`` equal Dirichlet star
    edges so that its level-set measures are divided evenly; the pieces above
    the cutoff are carried over unchanged as loops. The star's energy is
    computed from the coarea density of the level sets.
    """
    if psi.k <= 0.0:
        raise NotAnEigenfunction("the eigenvalue must be positive")
    scale = math.sqrt(max(psi.norm_squared(), 1e-300))
    worst = max(psi.residuals().values()) / (scale * max(1.0, psi.k))
    if worst > tol:
        raise NotAnEigenfunction(f"vertex conditions violated by {worst:.3g}")
    actual = discrete_edge_connectivity(mg)
    eta = actual if eta is None else int(eta)
    if eta < 2:
        raise BadParameter("symmetrization onto a star needs edge connectivity at least 2")
    if eta > actual:
        raise BadParameter(f"eta={eta} exceeds the edge connectivity {actual}")

    if level_set_measure(psi, 0.0, math.inf) > 0.5 * mg.L:
        psi = _negated(psi)
    mass_pos, energy_pos, _, _ = _region(psi, 0.0, math.inf)
    if mass_pos <= 0.0:
        raise NotAnEigenfunction("the function has no positive part")

    breaks = [t for t in _breakpoints(psi) if t > 0.0]
    bounds = [0.0] + breaks
    cutoff = 0.0
    for s, t in zip(bounds, bounds[1:]):
        if level_count(psi, 0.5 * (s + t)) >= eta:
            cutoff = t
    intervals = [(s, t) for s, t in zip(bounds, bounds[1:]) if t <= cutoff and t > s]

    amp = np.hypot(psi.coeffs[:, 0], psi.coeffs[:, 1])
    phase = np.arctan2(psi.coeffs[:, 1], psi.coeffs[:, 0])
    k = psi.k
    lengths = psi.graph.lengths

    def density_factory(s, t):
        # number of preimages per edge is constant on (s, t)
        mid = 0.5 * (s + t)
        counts = np.array([_solutions_in(mid / R, -ph, k * l - ph) if R > 0 else 0
                           for R, ph, l in zip(amp, phase, lengths)], dtype=float)
        active = counts > 0
        R = amp[active]
        at_top = np.abs(R - t) <= 1e-12 * R

        def density(level, to_top):
            gap = np.where(at_top, to_top, R - level)
            return float(np.sum(counts[active] / (k * np.sqrt(np.maximum(gap * (R + level), 1e-300)))))
        return density

    star_energy = star_mass = 0.0
    for s, t in intervals:
        dens = density_factory(s, t)
        star_energy += _chebyshev_quad(lambda lv, d: 1.0 / dens(lv, d), s, t)
        star_mass += _chebyshev_quad(lambda lv, d: lv * lv * dens(lv, d), s, t)
    star_energy *= eta * eta

    mass_s, _, length_s, _ = _region(psi, 0.0, cutoff) if cutoff > 0 else (0.0, 0.0, 0.0, [])
    mass_above, energy_above, _, above = _region(psi, cutoff, math.inf)
    loop_lengths = tuple(x1 - x0 for _, x0, x1 in above)

    mass_sym = star_mass + mass_above
    energy_sym = star_energy + energy_above
    star_len = length_s / eta
    edges = [(0, i + 1, star_len) for i in range(eta)] + [(0, 0, l) for l in loop_lengths]
    stower = MetricGraph.from_edges(eta + 1, edges, range(1, eta + 1)) if star_len > 0 else \
        MetricGraph.from_edges(1, [(0, 0, l) for l in loop_lengths])

    levels = np.linspace(0.0, cutoff, profile_points)
    positions = np.array([level_set_measure(psi, 0.0, t) / eta for t in levels])

    return SymmetrizationResult(
        stower=stower, eta=eta, cutoff=cutoff, star_edge_length=star_len, loop_lengths=loop_lengths,
        quotient_original=energy_pos / mass_pos, quotient_symmetrized=energy_sym / mass_sym,
        mass_original=mass_pos, mass_symmetrized=mass_sym,
        star_mass_closed_form=mass_s, star_mass_coarea=star_mass,
        levels=check_level_counts(psi, eta), profile_levels=levels, profile_positions=positions)
