"""Catalog of eigenvalue bounds with applicability predicates, and an engine
that evaluates them against computed spectra.

Metric bounds are evaluated on a canonical form of the graph: every
Dirichlet vertex is split into Dirichlet leaves (which leaves the Laplacian
unchanged) and natural degree-two vertices are suppressed. The counts
``V, E, beta, |N|, |D|`` and the edge lengths ``l_max, l_min`` refer to that
form. Metric eigenvalues are numbered from one (``lambda_1 <= lambda_2 ...``),
so the first nontrivial eigenvalue of a graph without Dirichlet vertices is
``lambda_2``. Normalized Laplacian eigenvalues ``alpha_0 = 0 <= alpha_1 ...``
are numbered from zero.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import BadParameter, GraphError, MissingInput, SingleVertex
from .graph_core import (CombinatorialGraph, DiscreteSpectrum, edge_connectivity, laplacian_spectrum,
                         normalized_spectrum)
from .metric_graph import (Edge, MetricGraph, betti_number, discrete_edge_connectivity, is_connected,
                           is_equilateral, leaf_diameter, leaves, suppress_degree_two, validate)
from .p_laplacian import check_p, discrete_gamma1_p, pi_p
from .spectral_solver import MetricSpectrum, eigenvalues

METRIC_TOL = 1e-8
DISCRETE_TOL = 1e-10
P_TOL = 1e-6


# ---------------------------------------------------------------------------
# invariants


@dataclass(frozen=True)
class MetricInvariants:
    V: int
    E: int
    L: float
    l_max: float
    l_min: float
    eta: int
    beta: int
    N: int
    D: int
    has_dirichlet: bool
    split_connected: bool
    is_cycle: bool
    is_tree: bool
    is_lollipop: bool
    leaf_diameter: Optional[float]
    merged_leaves_eta: Optional[int]
    raw_E: int
    equilateral: bool
    loop_free: bool
    kind: str = "metric"


@dataclass(frozen=True)
class CombinatorialInvariants:
    V: int
    E: int
    eta: Optional[int]
    deg_min: int
    deg_max: int
    V_star: int
    is_simple: bool
    is_complete: bool
    is_cycle: bool
    kind: str = "combinatorial"


def canonical_form(mg: MetricGraph) -> MetricGraph:
    from .surgery import split_dirichlet_vertices
    return suppress_degree_two(split_dirichlet_vertices(mg))


def _merge_leaves(mg: MetricGraph, lv: list[int]) -> MetricGraph:
    target = lv[0]
    drop = set(lv[1:])
    keep = [v for v in range(mg.V) if v not in drop]
    index = {v: i for i, v in enumerate(keep)}

    def relabel(x):
        return index[target] if x in drop else index[x]

    edges = tuple(Edge(relabel(e.u), relabel(e.w), e.length) for e in mg.edges)
    return MetricGraph(len(keep), edges)


def metric_invariants(mg: MetricGraph) -> MetricInvariants:
    problems = validate(mg)
    if problems:
        raise GraphError(f"invalid metric graph: {problems[0]}")
    can = canonical_form(mg)
    split_conn = is_connected(can)
    deg = can.degrees()
    lv = leaves(can)
    dirichlet_leaves = [v for v in lv if v in can.dirichlet]
    natural_leaves = [v for v in lv if v not in can.dirichlet]
    has_d = bool(mg.dirichlet)
    is_cycle = can.V == 1 and can.E == 1 and not has_d
    beta = betti_number(can)
    lolli = (not has_d and can.V == 2 and can.E == 2 and sum(e.is_loop for e in can.edges) == 1
             and len(natural_leaves) == 1)
    diam = leaf_diameter(can) if split_conn and len(lv) >= 2 else None
    merged = None
    if split_conn and len(lv) >= 2 and not natural_leaves and len(dirichlet_leaves) == len(can.dirichlet):
        merged = discrete_edge_connectivity(_merge_leaves(can, lv))
    return MetricInvariants(
        V=can.V, E=can.E, L=mg.L, l_max=float(can.lengths.max()), l_min=float(can.lengths.min()),
        eta=discrete_edge_connectivity(mg), beta=beta, N=len(natural_leaves), D=len(can.dirichlet),
        has_dirichlet=has_d, split_connected=split_conn, is_cycle=is_cycle,
        is_tree=split_conn and beta == 0 and not bool(deg.size == 0), is_lollipop=lolli,
        leaf_diameter=diam, merged_leaves_eta=merged, raw_E=mg.E,
        equilateral=is_equilateral(mg), loop_free=not mg.has_loops())


def combinatorial_invariants(g: CombinatorialGraph) -> CombinatorialInvariants:
    deg = g.degrees()
    eta = edge_connectivity(g) if g.V >= 2 else None
    return CombinatorialInvariants(
        V=g.V, E=g.E, eta=eta, deg_min=int(deg.min()), deg_max=int(deg.max()),
        V_star=int(np.sum(deg > 1)), is_simple=g.is_simple(), is_complete=g.is_complete(),
        is_cycle=g.is_cycle())


def invariants(graph):
    if isinstance(graph, MetricGraph):
        return metric_invariants(graph)
    if isinstance(graph, CombinatorialGraph):
        return combinatorial_invariants(graph)
    raise BadParameter(f"unsupported graph type {type(graph).__name__}")


# ---------------------------------------------------------------------------
# formula helpers shared with tests


def connectivity_bound(p: float, L: float, l_max: float, eta: int) -> float:
    """(p-1) (eta pi_p / (L + (eta-2)_+ l_max))^p."""
    return (p - 1.0) * (eta * pi_p(p) / (L + max(eta - 2, 0) * l_max)) ** p


def friedlander_bound(k: int, L: float) -> float:
    return (k * math.pi / (2.0 * L)) ** 2


def betti_lower_bound(k: int, L: float, N: int, beta: int) -> float:
    return ((k - 0.5 * (N + beta)) * math.pi / L) ** 2


def betti_upper_bound(k: int, L: float, N: int, beta: int, D: int) -> float:
    return ((k - 2 + beta + D + 0.5 * (N + beta)) * math.pi / L) ** 2


def asymptotic_window(inv: MetricInvariants) -> tuple[float, float]:
    """Range for sqrt(lambda_k) L / pi - k implied by the two Betti-number bounds."""
    half = 0.5 * (inv.N + inv.beta)
    return -half, inv.beta + inv.D + half - 2.0


@lru_cache(maxsize=256)
def path_gamma1_p(V: int, p: float) -> float:
    """First nontrivial p-eigenvalue of the path on V vertices (closed form at p = 2)."""
    if V < 2:
        raise SingleVertex("path needs two vertices")
    if p == 2.0:
        return 2.0 * (1.0 - math.cos(math.pi / V))
    from .generators import path
    # only the value enters the bound; for p < 2 the gradient test can stall at
    # symmetric minimizers even though the minimum itself is accurate
    return discrete_gamma1_p(path(V), p, strict=False).value


# ---------------------------------------------------------------------------
# catalog


Predicate = Callable[[object, int, float], Optional[str]]


@dataclass(frozen=True)
class BoundSpec:
    """One bound: ``formula(inv, k, p)`` gives the value, ``reject(inv, k, p)``
    returns a reason string when the bound does not apply (``None`` otherwise).

    ``target`` names the compared eigenvalue: ``lambda`` (metric, index k
    from one), ``mu1`` (metric, lambda_2), ``lambda1`` (metric ground state),
    ``gamma1`` (discrete Laplacian), ``alpha`` (normalized Laplacian,
    alpha_{k-1}). Targets ending in ``_p`` switch to the p-Laplacian when
    p != 2.
    """

    id: str
    side: str
    target: str
    convention: str
    graph_kind: str
    inputs: tuple[str, ...]
    summary: str
    formula: Callable = field(repr=False, compare=False)
    reject: Predicate = field(repr=False, compare=False)
    indexed: bool = False
    k_min: int = 1
    asserted: bool = True
    alternate: Optional[Callable] = field(default=None, repr=False, compare=False)

    @property
    def p_dependent(self) -> bool:
        return self.target.endswith("_p")


def _none(*_):
    return None


def _needs_no_dirichlet(inv, k, p):
    return "has Dirichlet vertices" if inv.has_dirichlet else None


def _all(*preds):
    def check(inv, k, p):
        for pr in preds:
            why = pr(inv, k, p)
            if why:
                return why
        return None
    return check


def _p2_only(inv, k, p):
    return "stated for p = 2 only" if p != 2.0 else None


def _not_cycle(inv, k, p):
    return "graph is a cycle" if inv.is_cycle else None


def _split_connected(inv, k, p):
    return None if inv.split_connected else "splitting Dirichlet vertices disconnects the graph"


def _eta_at_least(m):
    def check(inv, k, p):
        if inv.eta is None:
            raise MissingInput("edge connectivity is undefined on a single vertex")
        return None if inv.eta >= m else f"eta = {inv.eta} < {m}"
    return check


def _k_start(inv, k, p):
    # k >= 2 in general; k >= 1 once a Dirichlet vertex is present
    if k >= 2 or (k >= 1 and inv.has_dirichlet):
        return None
    return "k = 1 needs a Dirichlet vertex"


def _simple(inv, k, p):
    return None if inv.is_simple else "multigraph"


def _two_vertices(inv, k, p):
    return None if inv.V >= 2 else "single vertex"


def _k_upto_V(inv, k, p):
    return None if 2 <= k <= inv.V else f"k outside 2..{inv.V}"


def _b10_reject(inv, k, p):
    if not inv.split_connected:
        return "splitting Dirichlet vertices disconnects the graph"
    if inv.D < 2 or inv.N > 0:
        return "needs at least two leaves, all Dirichlet"
    if inv.merged_leaves_eta is None or inv.merged_leaves_eta < 2:
        return "merging the leaves leaves edge connectivity below two"
    return None


def _b12_reject(inv, k, p):
    if not (inv.is_tree and inv.split_connected):
        return "not a tree"
    if inv.N != 0 or inv.D < 2:
        return "not all leaves Dirichlet"
    return None


def _b13_reject(inv, k, p):
    if not (inv.is_tree and inv.split_connected):
        return "not a tree"
    if inv.N != 1 or inv.D < 1:
        return "needs exactly one natural leaf and Dirichlet leaves otherwise"
    return None


def _b15_reject(inv, k, p):
    if k < inv.N + inv.beta:
        return f"k < |N| + beta = {inv.N + inv.beta}"
    return None


def _b9_reject(inv, k, p):
    return None if inv.L < 2.0 * inv.l_max else "L >= 2 l_max"


def _b17_reject(inv, k, p):
    if not inv.equilateral:
        return "not equilateral"
    if not inv.loop_free:
        return "has loops"
    return None


def _lollipop(inv, k, p):
    return None if inv.is_lollipop else "not a lollipop"


def _b20_reject(inv, k, p):
    return None if k >= inv.E - inv.V_star + 1 else "k < E - V* + 1"


def _b22_reject(inv, k, p):
    return None if 2 * k - inv.V - inv.V_star - 1 + inv.E <= 0 else "2k - V - V* - 1 + E > 0"


def _combinatorial_not_cycle(inv, k, p):
    return "graph is a cycle" if inv.is_cycle else None


def _weaker(a, b):
    return min(a, b)


def _b10_value(inv, k, p):
    base = (pi_p(p) / inv.L) ** p
    return _weaker(base, (p - 1.0) * base)


def _b10_alt(inv, k, p):
    base = (pi_p(p) / inv.L) ** p
    return max(base, (p - 1.0) * base)


def _b11_value(inv, k, p):
    base = (pi_p(p) / (2.0 * inv.L)) ** p
    return _weaker(base, (p - 1.0) * base)


def _b11_alt(inv, k, p):
    base = (pi_p(p) / (2.0 * inv.L)) ** p
    return max(base, (p - 1.0) * base)


def _b7h_value(inv, k, p):
    return max(connectivity_bound(p, inv.L, inv.l_max, h) for h in range(1, inv.eta + 1))


def catalog() -> list[BoundSpec]:
    pi2 = math.pi ** 2
    M, C = "metric", "combinatorial"
    return [
        BoundSpec("B1", "Lower", "gamma1", "from_zero", C, ("eta", "V"),
                  "gamma_1 >= 2 eta (1 - cos(pi/V))",
                  lambda i, k, p: 2.0 * i.eta * (1.0 - math.cos(math.pi / i.V)),
                  _all(_two_vertices, _eta_at_least(1))),
        BoundSpec("B2", "Upper", "gamma1", "from_zero", C, ("eta",),
                  "gamma_1 <= eta + 1 (simple graphs)",
                  lambda i, k, p: i.eta + 1.0, _all(_two_vertices, _simple, _eta_at_least(1))),
        BoundSpec("B2'", "Upper", "gamma1", "from_zero", C, ("eta",),
                  "gamma_1 <= eta (simple, not complete)",
                  lambda i, k, p: float(i.eta),
                  _all(_two_vertices, _simple, lambda i, k, p: "complete" if i.is_complete else None),
                  asserted=False),
        BoundSpec("B3", "Lower", "gamma1_p", "from_zero", C, ("eta", "V", "p"),
                  "gamma_1^(p) >= eta gamma_1^(p)(path on V vertices)",
                  lambda i, k, p: i.eta * path_gamma1_p(i.V, p), _all(_two_vertices, _eta_at_least(1))),
        BoundSpec("B4", "Lower", "mu1", "from_zero", M, ("L",),
                  "mu_1 >= pi^2 / L^2", lambda i, k, p: pi2 / i.L ** 2, _needs_no_dirichlet),
        BoundSpec("B5", "Upper", "mu1", "from_zero", M, ("E", "L"),
                  "mu_1 <= pi^2 E^2 / L^2", lambda i, k, p: pi2 * i.E ** 2 / i.L ** 2,
                  _all(_needs_no_dirichlet, _not_cycle)),
        BoundSpec("B6", "Lower", "mu1_p", "from_zero", M, ("L", "p"),
                  "mu_1^(p) >= (p-1)(2 pi_p / L)^p for eta >= 2",
                  lambda i, k, p: (p - 1.0) * (2.0 * pi_p(p) / i.L) ** p,
                  _all(_needs_no_dirichlet, _eta_at_least(2))),
        BoundSpec("B7", "Lower", "mu1_p", "from_zero", M, ("eta", "L", "l_max", "p"),
                  "mu_1^(p) >= (p-1)(eta pi_p / (L + (eta-2) l_max))^p for eta >= 3",
                  lambda i, k, p: connectivity_bound(p, i.L, i.l_max, i.eta),
                  _all(_needs_no_dirichlet, _eta_at_least(3))),
        BoundSpec("B7h", "Lower", "mu1_p", "from_zero", M, ("eta", "L", "l_max", "p"),
                  "mu_1^(p) >= max_h (p-1)(h pi_p / (L + (h-2)_+ l_max))^p, 1 <= h <= eta",
                  _b7h_value, _all(_needs_no_dirichlet, _eta_at_least(1))),
        BoundSpec("B8", "Lower", "mu1", "from_zero", M, ("eta", "L", "l_max"),
                  "mu_1 >= eta^2 pi^2 / (L + (eta-2) l_max)^2 for eta >= 2",
                  lambda i, k, p: connectivity_bound(2.0, i.L, i.l_max, i.eta),
                  _all(_needs_no_dirichlet, _eta_at_least(2))),
        BoundSpec("B9", "Upper", "mu1", "from_zero", M, ("l_max", "L"),
                  "mu_1 <= 4 pi^2 / l_max^2 when L < 2 l_max",
                  lambda i, k, p: 4.0 * pi2 / i.l_max ** 2, _all(_needs_no_dirichlet, _b9_reject)),
        BoundSpec("B10", "Lower", "lambda1_p", "from_one", M, ("L", "p"),
                  "lambda_1^(p) >= (pi_p / L)^p, all leaves Dirichlet",
                  _b10_value, _b10_reject, alternate=_b10_alt),
        BoundSpec("B11", "Lower", "lambda1_p", "from_one", M, ("L", "p"),
                  "lambda_1^(p) >= (pi_p / (2L))^p with a Dirichlet vertex",
                  _b11_value, lambda i, k, p: None if i.has_dirichlet else "no Dirichlet vertex",
                  alternate=_b11_alt),
        BoundSpec("B12", "Lower", "lambda1", "from_one", M, ("D_diam",),
                  "lambda_1 >= pi^2 / diam^2 on trees with Dirichlet leaves",
                  lambda i, k, p: pi2 / i.leaf_diameter ** 2, _all(_p2_only, _b12_reject)),
        BoundSpec("B13", "Lower", "lambda1", "from_one", M, ("D_diam",),
                  "lambda_1 >= pi^2 / (4 diam^2) on trees with one natural leaf",
                  lambda i, k, p: pi2 / (4.0 * i.leaf_diameter ** 2), _all(_p2_only, _b13_reject)),
        BoundSpec("B14", "Lower", "lambda", "from_one", M, ("k", "L"),
                  "lambda_k >= k^2 pi^2 / (4 L^2)",
                  lambda i, k, p: friedlander_bound(k, i.L), _all(_p2_only, _k_start), indexed=True),
        BoundSpec("B15", "Lower", "lambda", "from_one", M, ("k", "N", "beta", "L"),
                  "lambda_k >= (k - (|N|+beta)/2)^2 pi^2 / L^2 for k >= |N| + beta",
                  lambda i, k, p: betti_lower_bound(k, i.L, i.N, i.beta),
                  _all(_p2_only, _split_connected, _not_cycle, _k_start, _b15_reject), indexed=True),
        BoundSpec("B16", "Upper", "lambda", "from_one", M, ("k", "N", "beta", "D", "L"),
                  "lambda_k <= (k - 2 + beta + |D| + (|N|+beta)/2)^2 pi^2 / L^2",
                  lambda i, k, p: betti_upper_bound(k, i.L, i.N, i.beta, i.D),
                  _all(_p2_only, _split_connected, _not_cycle), indexed=True),
        BoundSpec("B17L", "Lower", "lambda", "from_one", M, ("k", "E", "L"),
                  "lambda_k >= ((k - 1 - E)_+ pi / L)^2 on equilateral graphs",
                  lambda i, k, p: (max(k - 1 - i.raw_E, 0) * math.pi / i.L) ** 2,
                  _all(_p2_only, _needs_no_dirichlet, _b17_reject), indexed=True),
        BoundSpec("B17U", "Upper", "lambda", "from_one", M, ("k", "E", "L"),
                  "lambda_k <= ((k - 1 + E) pi / L)^2 on equilateral graphs",
                  lambda i, k, p: ((k - 1 + i.raw_E) * math.pi / i.L) ** 2,
                  _all(_p2_only, _needs_no_dirichlet, _b17_reject), indexed=True),
        BoundSpec("B18", "Lower", "alpha", "from_zero", C, ("eta", "deg_max", "V"),
                  "alpha_1 >= (2 eta / deg_max)(1 - cos(pi/V))",
                  lambda i, k, p: 2.0 * i.eta / i.deg_max * (1.0 - math.cos(math.pi / i.V)),
                  _all(_two_vertices, _eta_at_least(1)), k_min=2),
        BoundSpec("B19", "Lower", "alpha", "from_zero", C, ("eta", "E"),
                  "alpha_1 >= 1 - cos(pi eta / (E + (eta-2)_+))",
                  lambda i, k, p: 1.0 - math.cos(math.pi * i.eta / (i.E + max(i.eta - 2, 0))),
                  _all(_two_vertices, _eta_at_least(1)), k_min=2),
        BoundSpec("B20", "Lower", "alpha", "from_zero", C, ("k", "E", "V_star"),
                  "alpha_{k-1} >= 1 - cos((2k - E + V* - 1) pi / (2E)) for k >= E - V* + 1",
                  lambda i, k, p: 1.0 - math.cos((2 * k - i.E + i.V_star - 1) * math.pi / (2.0 * i.E)),
                  _all(_two_vertices, _k_upto_V, _combinatorial_not_cycle, _b20_reject),
                  indexed=True, k_min=2),
        BoundSpec("B21", "Lower", "alpha", "from_zero", C, ("k", "E"),
                  "alpha_{k-1} >= 1 - cos(k pi / (2E))",
                  lambda i, k, p: 1.0 - math.cos(k * math.pi / (2.0 * i.E)),
                  _all(_two_vertices, _k_upto_V), indexed=True, k_min=2),
        BoundSpec("B22", "Upper", "alpha", "from_zero", C, ("k", "E", "V", "V_star"),
                  "alpha_{k-1} <= 1 - cos((2k + 3E - V - V* - 1) pi / (2E)) when 2k - V - V* - 1 + E <= 0",
                  lambda i, k, p: 1.0 - math.cos((2 * k + 3 * i.E - i.V - i.V_star - 1) * math.pi / (2.0 * i.E)),
                  _all(_two_vertices, _k_upto_V, _combinatorial_not_cycle, _b22_reject),
                  indexed=True, k_min=2),
        BoundSpec("B23L", "Lower", "lambda", "from_one", M, ("k", "L"),
                  "lollipop: lambda_k >= (k-1)^2 pi^2 / L^2",
                  lambda i, k, p: ((k - 1) * math.pi / i.L) ** 2, _all(_p2_only, _lollipop),
                  indexed=True, k_min=2),
        BoundSpec("B23U", "Upper", "lambda", "from_one", M, ("k", "L"),
                  "lollipop: lambda_k <= k^2 pi^2 / L^2",
                  lambda i, k, p: (k * math.pi / i.L) ** 2, _all(_p2_only, _lollipop),
                  indexed=True, k_min=2),
        BoundSpec("Bextra", "Upper", "mu1_p", "from_zero", M, ("l_min", "p"),
                  "mu_1^(p) <= (p-1)(2 pi_p / l_min)^p",
                  lambda i, k, p: (p - 1.0) * (2.0 * pi_p(p) / i.l_min) ** p, _needs_no_dirichlet,
                  asserted=False),
    ]


def catalog_by_id() -> dict[str, BoundSpec]:
    return {s.id: s for s in catalog()}


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class BoundReport:
    id: str
    side: str
    k: Optional[int]
    applicable: bool
    bound: Optional[float]
    eigenvalue: Optional[float]
    margin: Optional[float]
    verdict: str
    asserted: bool = True
    alternate_bound: Optional[float] = None
    note: str = ""

    @property
    def violated(self) -> bool:
        return self.verdict == "Violated"


@dataclass(frozen=True)
class CombinatorialSpectra:
    laplacian: DiscreteSpectrum
    normalized: DiscreteSpectrum

    @classmethod
    def of(cls, g: CombinatorialGraph) -> "CombinatorialSpectra":
        return cls(laplacian_spectrum(g), normalized_spectrum(g))


def _target_index(spec: BoundSpec, k: Optional[int]) -> int:
    if spec.target in ("lambda",):
        return k
    if spec.target in ("mu1", "mu1_p"):
        return 2
    if spec.target in ("lambda1", "lambda1_p"):
        return 1
    if spec.target in ("gamma1", "gamma1_p"):
        return 1
    if spec.target == "alpha":
        return (k if spec.indexed else 2) - 1
    raise BadParameter(f"unknown target {spec.target}")


def _eigenvalue(spec: BoundSpec, spectrum, k, p, p_value):
    if spec.p_dependent and p != 2.0:
        if p_value is None:
            raise MissingInput(f"{spec.id} at p = {p} needs the p-eigenvalue")
        return float(p_value)
    idx = _target_index(spec, k)
    if spec.graph_kind == "metric":
        if not isinstance(spectrum, MetricSpectrum):
            raise MissingInput("metric bounds need a metric spectrum")
        if idx > len(spectrum):
            raise MissingInput(f"spectrum has {len(spectrum)} eigenvalues, index {idx} needed")
        return spectrum.lam(idx)
    if isinstance(spectrum, CombinatorialSpectra):
        seq = spectrum.normalized if spec.target == "alpha" else spectrum.laplacian
    elif isinstance(spectrum, DiscreteSpectrum):
        seq = spectrum
    else:
        raise MissingInput("combinatorial bounds need discrete spectra")
    if idx >= len(seq):
        raise MissingInput(f"spectrum has {len(seq)} eigenvalues, index {idx} needed")
    return seq[idx]


def default_tolerance(spec: BoundSpec, p: float = 2.0) -> float:
    if spec.p_dependent and p != 2.0:
        return P_TOL
    return METRIC_TOL if spec.graph_kind == "metric" else DISCRETE_TOL


def evaluate(spec: BoundSpec, inv, spectrum, k: Optional[int] = None, p: float = 2.0,
             p_value: Optional[float] = None, tol: Optional[float] = None) -> BoundReport:
    """Compare one bound with the matching eigenvalue."""
    p = check_p(p)
    if spec.graph_kind != inv.kind:
        raise BadParameter(f"{spec.id} is a {spec.graph_kind} bound")
    if spec.indexed and k is None:
        raise BadParameter(f"{spec.id} needs an eigenvalue index k")
    kk = k if spec.indexed else spec.k_min
    why = spec.reject(inv, kk, p)
    if why:
        return BoundReport(spec.id, spec.side, k, False, None, None, None, "NotApplicable", spec.asserted, None, why)
    value = float(spec.formula(inv, kk, p))
    alt = float(spec.alternate(inv, kk, p)) if spec.alternate else None
    eig = float(_eigenvalue(spec, spectrum, kk, p, p_value))
    margin = eig - value if spec.side == "Lower" else value - eig
    tol = default_tolerance(spec, p) if tol is None else tol
    verdict = "Holds" if margin >= -tol else "Violated"
    return BoundReport(spec.id, spec.side, k, True, value, eig, margin, verdict, spec.asserted, alt)


def _error_report(spec, k, exc) -> BoundReport:
    return BoundReport(spec.id, spec.side, k, False, None, None, None, "Error", spec.asserted, None,
                       f"{type(exc).__name__}: {exc}")


def evaluate_all(graph, spectrum=None, k_max: Optional[int] = None, p: float = 2.0,
                 p_values: Optional[dict] = None, tol: Optional[float] = None,
                 ids: Optional[set] = None) -> list[BoundReport]:
    """Every catalog bound for the graph's kind, in catalog order.

    Indexed bounds are evaluated for each k from their start up to the
    smaller of ``k_max`` and the spectrum length. Failures of single bounds
    become reports with verdict ``Error``.
    """
    inv = invariants(graph)
    if spectrum is None:
        if isinstance(graph, MetricGraph):
            spectrum = eigenvalues(graph, k_max or 20)
        else:
            spectrum = CombinatorialSpectra.of(graph)
    if isinstance(graph, MetricGraph):
        available = len(spectrum)
    else:
        available = graph.V
    top = available if k_max is None else min(k_max, available)
    p_values = p_values or {}
    out: list[BoundReport] = []
    for spec in catalog():
        if spec.graph_kind != inv.kind or (ids is not None and spec.id not in ids):
            continue
        ks = range(spec.k_min, top + 1) if spec.indexed else [None]
        for k in ks:
            try:
                out.append(evaluate(spec, inv, spectrum, k, p, p_values.get(spec.target), tol))
            except (MissingInput, GraphError, BadParameter, ValueError) as exc:
                out.append(_error_report(spec, k, exc))
    return out


def violations(reports, asserted_only: bool = True) -> list[BoundReport]:
    return [r for r in reports if r.violated and (r.asserted or not asserted_only)]


# ---------------------------------------------------------------------------
# serialization

CSV_COLUMNS = ("id", "side", "applicable", "bound", "eigenvalue", "margin", "verdict", "k", "asserted")


def reports_to_json(reports) -> str:
    return json.dumps([asdict(r) for r in reports], indent=2)


def reports_from_json(text: str) -> list[BoundReport]:
    return [BoundReport(**d) for d in json.loads(text)]


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()
