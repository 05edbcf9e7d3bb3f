"""Reproducible verification suite.

Each criterion is a function ``criterion_N(seed) -> CriterionResult``. Random
corpora are drawn from ``numpy.random.default_rng([seed, N])`` so criteria are
independent of each other and of the order in which they run.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np

from . import generators as G
from .bounds import (asymptotic_window, catalog_by_id, evaluate, evaluate_all,
                     metric_invariants, path_gamma1_p, violations)
from .errors import ScanIncomplete
from .graph_core import edge_connectivity, normalized_spectrum, spectral_gap
from .metric_graph import MetricGraph, discrete_edge_connectivity
from .p_laplacian import DiscreteQuotient, discrete_gamma1_p, pi_p, sin_p
from .spectral_solver import count_below, eigenfunction, eigenvalues, von_below_spectrum
from .surgery import dirichlet_split, symmetrize_positive_part

DEFAULT_SEED = 0


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: list[str] = field(default_factory=list)
    seconds: float = 0.0
    incomplete: bool = False

    def line(self) -> str:
        status = "PASS" if self.passed else ("INCOMPLETE" if self.incomplete else "FAIL")
        return f"[{status}] {self.number:2d}. {self.title} ({self.seconds:.1f}s)"


class _Check:
    """Collects failed comparisons; a criterion passes when none were recorded."""

    def __init__(self):
        self.failures: list[str] = []
        self.notes: list[str] = []
        self.count = 0

    def that(self, ok: bool, message: str) -> bool:
        self.count += 1
        if not ok:
            self.failures.append(message)
        return ok

    def close(self, got: float, want: float, atol: float = 0.0, rtol: float = 0.0, what: str = "") -> bool:
        ok = abs(got - want) <= atol + rtol * abs(want)
        return self.that(ok, f"{what}: got {got!r}, expected {want!r}")


def _rng(seed: int, number: int) -> np.random.Generator:
    return np.random.default_rng([seed, number])


# ---------------------------------------------------------------------------
# criteria


def criterion_1(seed: int = DEFAULT_SEED) -> _Check:
    c = _Check()
    for V in range(2, 21):
        c.close(spectral_gap(G.path(V)), 2.0 * (1.0 - math.cos(math.pi / V)), atol=1e-10, what=f"gamma_1(P_{V})")
    for n in range(3, 9):
        g = G.complete(n)
        c.close(spectral_gap(g), float(n), atol=1e-10, what=f"gamma_1(K_{n})")
        c.that(edge_connectivity(g) + 1 == n, f"eta(K_{n}) + 1 != {n}")
    return c


def criterion_2(seed: int = DEFAULT_SEED) -> _Check:
    c = _Check()
    for eta in (2, 3, 4):
        for V in range(3, 9):
            want = eta * spectral_gap(G.path(V))
            c.close(spectral_gap(G.regular_discrete_pumpkin_chain(eta, V)), want, rtol=1e-10,
                    what=f"eta={eta}, V={V}")
    return c


def _closed_form_cases():
    L = 1.7
    n = np.arange(1, 11)
    circle = [0.0] + [(2 * math.pi * j / L) ** 2 for j in range(1, 6) for _ in range(2)]
    return [
        ("interval NN", G.interval(L, "NN"), ((n - 1) * math.pi / L) ** 2),
        ("interval DD", G.interval(L, "DD"), (n * math.pi / L) ** 2),
        ("interval DN", G.interval(L, "DN"), ((n - 0.5) * math.pi / L) ** 2),
        ("circle", G.cycle(L), np.array(circle[:10])),
    ]


def criterion_3(seed: int = DEFAULT_SEED) -> _Check:
    c = _Check()
    for name, mg, want in _closed_form_cases():
        t0 = time.perf_counter()
        got = eigenvalues(mg, 10).eigenvalues
        elapsed = time.perf_counter() - t0
        for j, (a, b) in enumerate(zip(got, want), start=1):
            c.close(a, float(b), atol=1e-12, rtol=1e-8, what=f"{name} lambda_{j}")
        c.that(elapsed < 1.0, f"{name} took {elapsed:.2f}s")
    return c


def criterion_4(seed: int = DEFAULT_SEED) -> _Check:
    c = _Check()
    rng = _rng(seed, 4)
    top = math.pi ** 2 * (1.0 - 1e-7)
    for _ in range(50):
        V = int(rng.integers(2, 9))
        g = G.random_simple_graph(rng, V)
        mg = G.metrize(g)
        n = count_below(mg, math.sqrt(top))
        solver = [x for x in eigenvalues(mg, n).eigenvalues if x > 1e-9]
        transferred = [x for x in von_below_spectrum(g).eigenvalues if x < top]
        if not c.that(len(solver) == len(transferred),
                      f"{g.edges}: {len(solver)} solver vs {len(transferred)} transferred eigenvalues"):
            continue
        for a, b in zip(solver, transferred):
            c.close(a, b, rtol=1e-6, what=f"graph {g.edges}")
    return c


def _soundness_metric_corpus(rng, size=500):
    for i in range(size):
        kind = i % 5
        if kind == 3:
            V = int(rng.integers(2, 7))
            E = int(rng.integers(V - 1, min(V + 4, 10) + 1))
            g = G.random_multigraph(rng, V, E)
            mg = G.metrize(g, float(rng.uniform(0.3, 1.5)))
            if rng.random() < 0.3:
                mg = MetricGraph(mg.V, mg.edges, frozenset({int(rng.integers(0, V))}))
            yield mg
        elif kind == 4:
            mg = G.random_metric_tree(rng, int(rng.integers(3, 9)))
            leaf = [v for v in range(mg.V) if mg.degrees()[v] == 1]
            keep = set(leaf[1:]) if rng.random() < 0.5 else set(leaf)
            yield MetricGraph(mg.V, mg.edges, frozenset(keep))
        else:
            yield G.random_metric_graph(rng)


def _soundness_combinatorial_corpus(rng, size=200):
    for i in range(size):
        V = int(rng.integers(2, 10))
        if i % 2:
            yield G.random_simple_graph(rng, V)
        else:
            yield G.random_multigraph(rng, V, int(rng.integers(V - 1, 2 * V + 2)))
    for n in range(3, 9):
        yield G.complete(n)
        yield G.cycle_graph(n)
        yield G.wheel(n)
        yield G.star(n)


def criterion_5(seed: int = DEFAULT_SEED) -> _Check:
    c = _Check()
    rng = _rng(seed, 5)
    seen = set()
    for mg in _soundness_metric_corpus(rng):
        reports = evaluate_all(mg, k_max=20)
        for r in reports:
            c.that(r.verdict != "Error", f"{r.id} k={r.k} errored on {mg}: {r.note}")
            seen.update([r.id] if r.applicable else [])
        for r in violations(reports):
            c.that(False, f"{r.id} k={r.k} violated by {r.margin:.3g} on {mg}")
    for g in _soundness_combinatorial_corpus(rng):
        reports = evaluate_all(g)
        for r in reports:
            c.that(r.verdict != "Error", f"{r.id} k={r.k} errored on {g}: {r.note}")
            seen.update([r.id] if r.applicable else [])
        for r in violations(reports):
            c.that(False, f"{r.id} k={r.k} violated by {r.margin:.3g} on {g}")
    required = {"B4", "B5", "B6", "B7", "B8", "B9", "B10", "B11", "B12", "B13", "B14", "B15", "B16",
                "B17L", "B17U", "B18", "B19", "B20", "B21", "B22"}
    missing = sorted(required - seen)
    c.that(not missing, f"bounds never applicable on the corpus: {missing}")
    return c


def criterion_6(seed: int = DEFAULT_SEED) -> _Check:
    c = _Check()
    rng = _rng(seed, 6)
    cases = [G.symmetric_necklace(n) for n in range(1, 5)]
    for _ in range(6):
        cells = list(rng.uniform(0.2, 1.5, size=int(rng.integers(1, 5))))
        ends = tuple(float(x) if rng.random() < 0.5 else 0.0 for x in rng.uniform(0.2, 1.5, size=2))
        cases.append(G.symmetric_necklace(cells, ends))
    for mg in cases:
        c.close(eigenvalues(mg, 2).lam(2), 4 * math.pi ** 2 / mg.L ** 2, rtol=1e-8, what=f"necklace {mg}")
    spec = catalog_by_id()["B4"]
    for L in (0.5, 1.0, 2.7):
        mg = G.interval(L)
        r = evaluate(spec, metric_invariants(mg), eigenvalues(mg, 2))
        c.that(r.applicable and abs(r.margin) <= 1e-10, f"interval L={L}: B4 margin {r.margin}")
    return c


def criterion_7(seed: int = DEFAULT_SEED) -> _Check:
    c = _Check()
    mg = G.lollipop(1.0 - 1e-3, 1e-3)
    sp = eigenvalues(mg, 6)
    four_pi2 = 4 * math.pi ** 2
    for k, want in ((2, four_pi2), (3, four_pi2), (4, 4 * four_pi2), (5, 4 * four_pi2)):
        c.close(sp.lam(k), want, rtol=1e-2, what=f"lambda_{k}")
    reports = evaluate_all(mg, sp, k_max=6, ids={"B23L", "B23U"})
    ks = sorted({r.k for r in reports if r.applicable})
    c.that(ks == [2, 3, 4, 5, 6], f"B23 evaluated for k = {ks}")
    for r in reports:
        c.that(r.verdict == "Holds", f"{r.id} k={r.k}: {r.verdict} ({r.margin})")
    return c


def criterion_8(seed: int = DEFAULT_SEED) -> _Check:
    c = _Check()
    rng = _rng(seed, 8)
    n_max, tol = 8, 1e-8
    for _ in range(100):
        mg = G.random_metric_tree(rng, int(rng.integers(3, 9)))
        deg = mg.degrees()
        v = int(np.argmax(deg))
        base = eigenvalues(mg, n_max + 2)
        for r in (1, 2):
            if r >= deg[v]:
                continue
            split = [eigenvalues(dirichlet_split(mg, v, list(sub)), n_max)
                     for sub in combinations(mg.incident(v), r)]
            for n in range(1, n_max + 1):
                lo = min(s.lam(n) for s in split)
                hi = max(s.lam(n) for s in split)
                chain = [base.lam(n - 1) if n > 1 else -math.inf, lo, base.lam(n), hi, base.lam(n + 1)]
                c.that(all(a <= b + tol * max(1.0, abs(b)) for a, b in zip(chain, chain[1:])),
                       f"tree {mg.edges} v={v} r={r} n={n}: {chain}")
    return c


def criterion_9(seed: int = DEFAULT_SEED) -> _Check:
    c = _Check()
    rng = _rng(seed, 9)
    c.that(pi_p(2.0) == math.pi, f"pi_2 = {pi_p(2.0)!r}")
    x = np.linspace(0.0, 2 * math.pi, 2001)
    dev = float(np.max(np.abs(sin_p(2.0, x) - np.sin(x))))
    c.that(dev <= 1e-10, f"sin_2 deviates from sin by {dev}")

    for _ in range(100):
        V = int(rng.integers(2, 8))
        g = G.random_multigraph(rng, V, int(rng.integers(V - 1, 2 * V)))
        got = discrete_gamma1_p(g, 2.0, restarts=1, seed=seed, strict=False).value
        c.close(got, spectral_gap(g), atol=1e-6, what=f"p=2 quotient on {g.edges}")

    for p in (1.5, 3.0):
        for _ in range(100):
            V = int(rng.integers(2, 7))
            g = G.random_multigraph(rng, V, int(rng.integers(V - 1, 2 * V)))
            got = discrete_gamma1_p(g, p, restarts=2, seed=seed, strict=False).value
            bound = edge_connectivity(g) * path_gamma1_p(V, p)
            c.that(got - bound >= -1e-6, f"p={p}, {g.edges}: {got} < {bound}")

    for p in (1.5, 3.0):
        for eta in (2, 3):
            for V in (3, 4, 5):
                got = discrete_gamma1_p(G.regular_discrete_pumpkin_chain(eta, V), p, restarts=4, seed=seed,
                                        strict=False).value
                c.close(got, eta * path_gamma1_p(V, p), rtol=1e-5, what=f"p={p} chain eta={eta} V={V}")

    for p in (1.5, 3.0, 4.0):
        for _ in range(5):
            V = int(rng.integers(3, 7))
            g = G.random_multigraph(rng, V, int(rng.integers(V - 1, 2 * V)))
            q = DiscreteQuotient(g, p)
            f = rng.standard_normal(V)
            _, grad = q.value_and_grad(f)
            h = 1e-6
            fd = np.array([(q(f + h * e) - q(f - h * e)) / (2 * h) for e in np.eye(V)])
            err = float(np.linalg.norm(fd - grad) / max(np.linalg.norm(grad), 1e-12))
            c.that(err <= 1e-4, f"gradient mismatch {err:.2e} at p={p}")
    return c


def criterion_10(seed: int = DEFAULT_SEED) -> _Check:
    c = _Check()
    for n in range(5, 13):
        a1 = normalized_spectrum(G.wheel(n))[1]
        lower = 1.0 - math.cos(3 * math.pi / (2 * n + 1))
        c.that(a1 - lower > 0.0, f"W_{n + 1}: alpha_1 {a1} not above {lower}")
        c.close(a1, 1.0 - 2.0 / 3.0 * math.cos(2 * math.pi / n), atol=1e-9, what=f"alpha_1(W_{n + 1})")
    for n in range(2, 11):
        c.close(normalized_spectrum(G.star(n))[n - 1], 1.0, atol=1e-10, what=f"alpha_{n - 1}(S_{n + 1})")
    return c


def criterion_11(seed: int = DEFAULT_SEED, size: int = 60) -> _Check:
    c = _Check()
    rng = _rng(seed, 11)
    checked = 0
    while checked < size:
        mg = G.random_metric_graph(rng)
        inv = metric_invariants(mg)
        if inv.is_cycle or not inv.split_connected:
            continue
        checked += 1
        lo, hi = asymptotic_window(inv)
        sp = eigenvalues(mg, 40)
        for k in range(10, 41):
            x = math.sqrt(sp.lam(k)) * mg.L / math.pi - k
            slack = 1e-8 * (k + abs(x))
            if k >= inv.N + inv.beta:
                c.that(x >= lo - slack, f"k={k}: {x} below {lo} on {mg}")
            c.that(x <= hi + slack, f"k={k}: {x} above {hi} on {mg}")
    return c


def criterion_12(seed: int = DEFAULT_SEED, size: int = 50) -> _Check:
    c = _Check()
    rng = _rng(seed, 12)
    done = 0
    while done < size:
        mg = G.random_metric_graph(rng, dirichlet_probability=0.0)
        if discrete_edge_connectivity(mg) < 2:
            continue
        done += 1
        lam = eigenvalues(mg, 2).lam(2)
        res = symmetrize_positive_part(mg, eigenfunction(mg, lam))
        c.that(res.margin >= -1e-7, f"quotient increased by {-res.margin:.3g} on {mg}")
        c.close(res.mass_symmetrized, res.mass_original, atol=1e-9, rtol=1e-9, what=f"L2 norm on {mg}")
        c.close(res.star_mass_coarea, res.star_mass_closed_form, atol=1e-9, rtol=1e-9,
                what=f"star mass on {mg}")
        c.that(res.levels.ok, f"level counts {res.levels} on {mg}")
    return c


# ---------------------------------------------------------------------------
# registry and runner


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    groups: tuple[str, ...]
    run: Callable[[int], _Check]


CRITERIA = (
    Criterion(1, "Fiedler sharpness on paths and complete graphs", ("discrete",), criterion_1),
    Criterion(2, "pumpkin-chain factorization", ("discrete",), criterion_2),
    Criterion(3, "secular solver vs closed forms", ("solver",), criterion_3),
    Criterion(4, "von Below cross-check", ("solver",), criterion_4),
    Criterion(5, "bound soundness sweep", ("bounds",), criterion_5),
    Criterion(6, "equality cases: necklaces and intervals", ("bounds", "solver"), criterion_6),
    Criterion(7, "lollipop limit", ("bounds", "solver"), criterion_7),
    Criterion(8, "Dirichlet interlacing on trees", ("surgery", "solver"), criterion_8),
    Criterion(9, "p-Laplacian checks", ("plap",), criterion_9),
    Criterion(10, "wheel and star normalized spectra", ("discrete", "bounds"), criterion_10),
    Criterion(11, "asymptotic window", ("bounds", "solver"), criterion_11),
    Criterion(12, "symmetrization", ("surgery",), criterion_12),
)

GROUPS = tuple(sorted({g for cr in CRITERIA for g in cr.groups}))


def select(only=None) -> list[Criterion]:
    """Criteria matching ``only``: group names or criterion numbers (all when empty)."""
    if not only:
        return list(CRITERIA)
    keys = {str(x).strip() for x in only}
    unknown = keys - set(GROUPS) - {str(cr.number) for cr in CRITERIA}
    if unknown:
        raise ValueError(f"unknown criterion selector(s): {sorted(unknown)}")
    return [cr for cr in CRITERIA if str(cr.number) in keys or keys & set(cr.groups)]


def run_criterion(cr: Criterion, seed: int = DEFAULT_SEED) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        check = cr.run(seed)
        passed = not check.failures
        details = check.failures[:20]
        incomplete = False
    except ScanIncomplete as exc:
        passed, details, incomplete = False, [f"ScanIncomplete: {exc}"], True
    return CriterionResult(cr.number, cr.title, passed, details, time.perf_counter() - t0, incomplete)


def run_suite(seed: int = DEFAULT_SEED, only=None, progress=None) -> list[CriterionResult]:
    out = []
    for cr in select(only):
        res = run_criterion(cr, seed)
        if progress:
            progress(res)
        out.append(res)
    return out


def exit_code(results) -> int:
    if all(r.passed for r in results):
        return 0
    if any(r.incomplete for r in results) and all(r.passed or r.incomplete for r in results):
        return 2
    return 1
