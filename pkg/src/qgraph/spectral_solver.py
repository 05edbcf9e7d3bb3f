"""Laplacian eigenvalues and eigenfunctions on metric graphs.

On each edge an eigenfunction with wavenumber ``k > 0`` is
``a cos(kx) + b sin(kx)``. Vertex conditions turn the 2E coefficients into a
square linear system (the secular matrix); ``k**2`` is an eigenvalue exactly
when that matrix is singular.

Roots are located with an exact eigenvalue counting function rather than by
looking for dips of the smallest singular value, which cannot tell two nearby
roots from one. For a wavenumber ``k`` away from the Dirichlet spectra of
the edges, the number of eigenvalues below ``k**2`` is

    sum_e floor(k l_e / pi) + (negative eigenvalues of the Dirichlet-to-Neumann matrix),

and the second term is evaluated through a bounded symmetric matrix whose
Schur complement is the Dirichlet-to-Neumann matrix (see
:meth:`CountingFunction.matrix`), so poles of ``cot`` never enter. Each jump of the
count is isolated by bisection and then polished by a bracketed root search
on the eigenvalue of that matrix which changes sign; the count on both sides
of the polished root confirms the multiplicity, and the smallest singular
values of the secular matrix cross-check it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import NotAnEigenvalue, ScanIncomplete, ZeroFunction
from .graph_core import CombinatorialGraph, normalized_spectrum
from .metric_graph import MetricGraph, component_labels, total_length, underlying_combinatorial

# quadrant index -> signs of (cos, sin)
_QUADRANT_SIGNS = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]], dtype=float)


def _vertex_ends(mg: MetricGraph):
    """For each vertex, the list of (edge, at_end) pairs touching it."""
    ends: list[list[tuple[int, bool]]] = [[] for _ in range(mg.V)]
    for j, e in enumerate(mg.edges):
        ends[e.u].append((j, False))
        ends[e.w].append((j, True))
    return ends


def secular_matrix(mg: MetricGraph, k: float, scaled: bool = False) -> np.ndarray:
    """Square 2E x 2E matrix whose null space holds the eigenfunction coefficients.

    Columns are ``(a_0, b_0, a_1, b_1, ...)``. Rows go through vertices in
    ascending order: a natural vertex of degree d gives d-1 continuity rows
    followed by one Kirchhoff row (sum of inward derivatives), a Dirichlet
    vertex gives d rows setting every trace to zero. With ``scaled=True`` the
    Kirchhoff rows are divided by ``k`` so all entries lie in [-1, 1].
    """
    if k <= 0:
        raise ValueError("wavenumber must be positive")
    E = mg.E
    M = np.zeros((2 * E, 2 * E))
    c = np.cos(k * mg.lengths)
    s = np.sin(k * mg.lengths)
    dscale = 1.0 if scaled else k

    def trace(row, j, at_end, sign=1.0):
        if at_end:
            row[2 * j] += sign * c[j]
            row[2 * j + 1] += sign * s[j]
        else:
            row[2 * j] += sign

    r = 0
    for v, ends in enumerate(_vertex_ends(mg)):
        if not ends:
            continue
        if v in mg.dirichlet:
            for j, at_end in ends:
                trace(M[r], j, at_end)
                r += 1
            continue
        j0, end0 = ends[0]
        for j, at_end in ends[1:]:
            trace(M[r], j, at_end)
            trace(M[r], j0, end0, -1.0)
            r += 1
        for j, at_end in ends:
            if at_end:
                M[r, 2 * j] += dscale * s[j]
                M[r, 2 * j + 1] -= dscale * c[j]
            else:
                M[r, 2 * j + 1] += dscale
        r += 1
    return M


class CountingFunction:
    """Exact number of eigenvalues strictly below ``k**2`` (with multiplicity).

    Valid for disconnected graphs and any Dirichlet set. At the isolated
    wavenumbers where ``k l_e`` is a multiple of pi for some edge the value
    agrees with the limit from the right.
    """

    def __init__(self, mg: MetricGraph):
        deg = mg.degrees()
        free = [v for v in range(mg.V) if v not in mg.dirichlet and deg[v] > 0]
        index = {v: i for i, v in enumerate(free)}
        self.nf = len(free)
        self.E = mg.E
        self.lengths = mg.lengths
        self.iu = np.array([index.get(e.u, -1) for e in mg.edges], dtype=int)
        self.iw = np.array([index.get(e.w, -1) for e in mg.edges], dtype=int)
        self._ok_u = self.iu >= 0
        self._ok_w = self.iw >= 0
        self._rows = [self.nf + 2 * np.arange(self.E) + t for t in (0, 1)]

    def matrix(self, k: float) -> tuple[np.ndarray, int]:
        nf, E = self.nf, self.E
        q = k * self.lengths / math.pi
        fq = np.floor(q).astype(int)
        A = np.zeros((nf + 2 * E, nf + 2 * E))
        inv2 = 1.0 / math.sqrt(2.0)
        for t, sign in ((0, -1.0), (1, 1.0)):
            phi = 0.5 * math.pi * q + 0.5 * math.pi * t
            signs = _QUADRANT_SIGNS[(fq + t) % 4]
            m = np.sqrt(k * np.abs(np.cos(phi))) * inv2
            rows = self._rows[t]
            A[rows, rows] = -signs[:, 0] * signs[:, 1] * np.abs(np.sin(phi))
            # each (vertex, row) pair occurs once per call, so plain fancy indexing is safe
            for ok, idx, sgn in ((self._ok_u, self.iu, 1.0), (self._ok_w, self.iw, sign)):
                A[idx[ok], rows[ok]] += sgn * m[ok]
                A[rows[ok], idx[ok]] += sgn * m[ok]
        return A, int(fq.sum())

    def crossing(self, k: float, index: int) -> float:
        """The ``index``-th smallest eigenvalue of :meth:`matrix`; it changes sign
        at an eigenvalue between two consecutive edge Dirichlet wavenumbers."""
        A, _ = self.matrix(k)
        return float(np.linalg.eigvalsh(A)[index])

    def floors(self, k: float) -> int:
        return int(np.floor(k * self.lengths / math.pi).sum())

    def __call__(self, k: float) -> int:
        A, floors = self.matrix(k)
        if A.shape[0] == 0:
            return floors - self.E
        negatives = int(np.count_nonzero(np.linalg.eigvalsh(A) < 0.0))
        return floors + negatives - self.E


def count_below(mg: MetricGraph, k: float) -> int:
    return CountingFunction(mg)(k)


def zero_multiplicity(mg: MetricGraph) -> int:
    """Number of components (with edges) that carry no Dirichlet vertex."""
    labels = component_labels(mg)
    deg = mg.degrees()
    comps = {labels[v] for v in range(mg.V) if deg[v] > 0}
    blocked = {labels[v] for v in mg.dirichlet if deg[v] > 0}
    return len(comps - blocked)


@dataclass(frozen=True)
class MetricSpectrum:
    eigenvalues: tuple[float, ...]
    convention: str
    k_max: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.eigenvalues)

    def __getitem__(self, i):
        return self.eigenvalues[i]

    def lam(self, k: int) -> float:
        """Eigenvalue number k counted from one."""
        return self.eigenvalues[k - 1]

    def mu(self, k: int) -> float:
        """Eigenvalue number k counted from zero."""
        return self.eigenvalues[k]

    def multiplicity_runs(self, rtol: float = 1e-9) -> list[tuple[float, int]]:
        runs: list[tuple[float, int]] = []
        for x in self.eigenvalues:
            if runs and abs(x - runs[-1][0]) <= rtol * max(1.0, abs(x)):
                runs[-1] = (runs[-1][0], runs[-1][1] + 1)
            else:
                runs.append((x, 1))
        return runs


def _polish(count, a, b, na, nb, rel_width):
    """Root of the crossing eigenvalue inside a bracket free of edge Dirichlet
    wavenumbers, accepted only if the count jumps entirely across it."""
    if count.floors(a) != count.floors(b) or count.nf + 2 * count.E == 0:
        return None
    index = na - count.floors(a) + count.E
    fa = count.crossing(a, index)
    fb = count.crossing(b, index)
    if fa == 0.0:
        r = a
    elif fa > 0.0 > fb:
        r = optimize.brentq(count.crossing, a, b, args=(index,), xtol=0.25 * rel_width * b, rtol=1e-15)
    else:
        return None
    d = rel_width * r
    if count(r - d) == na and count(r + d) == nb:
        return r
    return None


def _isolate(count, a, b, na, nb, rel_width, out):
    # Bisect [a, b] until each jump of the count is isolated, then polish the root.
    stack = [(a, b, na, nb)]
    while stack:
        a, b, na, nb = stack.pop()
        if nb == na:
            continue
        if b - a <= rel_width * b:
            out.append((0.5 * (a + b), nb - na))
            continue
        r = _polish(count, a, b, na, nb, rel_width)
        if r is not None:
            out.append((r, nb - na))
            continue
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            out.append((m, nb - na))
            continue
        nm = count(m)
        nm = min(max(nm, na), nb)
        stack.append((m, b, nm, nb))
        stack.append((a, m, na, nm))


def sigma_profile(mg: MetricGraph, k: float) -> np.ndarray:
    M = secular_matrix(mg, k, scaled=True)
    return np.linalg.svd(M, compute_uv=False)


def eigenvalues(mg: MetricGraph, n: int, grid: float | None = None, tau: float = 1e-7,
                rel_width: float = 1e-13) -> MetricSpectrum:
    """The n lowest eigenvalues (with multiplicity, nondecreasing).

    ``grid`` is the step of the coarse wavenumber partition (default
    pi / (8 L)); ``tau`` is the relative singular-value threshold used to
    confirm each root.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    L = total_length(mg)
    count = CountingFunction(mg)
    z = zero_multiplicity(mg)
    convention = "from_one" if mg.dirichlet else "from_zero"
    values = [0.0] * min(z, n)
    diag = {"zero_multiplicity": z}
    if z >= n:
        return MetricSpectrum(tuple(values), convention, 0.0, diag)

    # Every positive eigenvalue of every component is at least (pi / 2L)^2.
    k_lo = 0.999 * math.pi / (2.0 * L)
    n_lo = count(k_lo)
    if n_lo != z:
        raise ScanIncomplete(f"count {n_lo} below the lowest admissible wavenumber, expected {z}", (0.0, k_lo))
    k_hi = math.pi * (n + 1) / L
    n_hi = count(k_hi)
    while n_hi < n:
        k_hi *= 1.5
        n_hi = count(k_hi)

    h = grid if grid is not None else math.pi / (8.0 * L)
    diag.update(grid=h, tau=tau, refinements=0)
    for attempt in range(4):
        ks = np.arange(k_lo, k_hi, h)
        ks = np.append(ks[ks < k_hi], k_hi)
        counts = [n_lo] + [count(k) for k in ks[1:-1]] + [n_hi]
        roots: list[tuple[float, int]] = []
        for i in range(len(ks) - 1):
            lo_c, hi_c = counts[i], counts[i + 1]
            if hi_c < lo_c:
                break
            _isolate(count, ks[i], ks[i + 1], lo_c, hi_c, rel_width, roots)
        found = sum(m for _, m in roots)
        if found == n_hi - n_lo:
            break
        h /= 4.0
        diag["refinements"] = attempt + 1
    else:
        raise ScanIncomplete(f"located {found} of {n_hi - n_lo} eigenvalues", (k_lo, k_hi))

    roots.sort()
    mismatches = []
    for k, mult in roots:
        sv = sigma_profile(mg, k)
        below = int(np.count_nonzero(sv <= tau * max(sv[0], 1.0)))
        if below != mult:
            mismatches.append({"k": k, "count_jump": mult, "small_singular_values": below})
        values.extend([float(k * k)] * mult)
    values = values[:n]
    weyl_cap = k_hi * L / math.pi + mg.V + 1
    diag.update(
        sigma_mismatches=mismatches,
        weyl_envelope_ok=bool(n_hi <= weyl_cap + z),
        count_at_k_max=n_hi,
    )
    return MetricSpectrum(tuple(values), convention, k_hi, diag)


# ---------------------------------------------------------------------------
# Eigenfunctions


def _edge_gram(k: float, l: float) -> np.ndarray:
    if k == 0.0:
        return np.array([[l, 0.0], [0.0, 0.0]])
    s2 = math.sin(2 * k * l) / (4 * k)
    cs = math.sin(k * l) ** 2 / (2 * k)
    return np.array([[0.5 * l + s2, cs], [cs, 0.5 * l - s2]])


def _gram(mg: MetricGraph, k: float) -> np.ndarray:
    G = np.zeros((2 * mg.E, 2 * mg.E))
    for j, l in enumerate(mg.lengths):
        G[2 * j:2 * j + 2, 2 * j:2 * j + 2] = _edge_gram(k, l)
    return G


@dataclass(frozen=True)
class Eigenfunction:
    """``psi_e(x) = a_e cos(kx) + b_e sin(kx)`` on every edge, unit L2 norm."""

    graph: MetricGraph
    k: float
    coeffs: np.ndarray = field(compare=False)

    @property
    def eigenvalue(self) -> float:
        return self.k * self.k

    def __call__(self, edge: int, x):
        a, b = self.coeffs[edge]
        return a * np.cos(self.k * np.asarray(x)) + b * np.sin(self.k * np.asarray(x))

    def derivative(self, edge: int, x):
        a, b = self.coeffs[edge]
        kx = self.k * np.asarray(x)
        return self.k * (b * np.cos(kx) - a * np.sin(kx))

    def end_values(self) -> np.ndarray:
        """Array of shape (E, 2): values at the start and at the end of each edge."""
        return np.array([[self(j, 0.0), self(j, e.length)] for j, e in enumerate(self.graph.edges)])

    def vertex_values(self) -> dict[int, float]:
        """Value at each vertex with an edge (taken from the first incident end)."""
        out: dict[int, float] = {}
        ev = self.end_values()
        for j, e in enumerate(self.graph.edges):
            out.setdefault(e.u, float(ev[j, 0]))
            out.setdefault(e.w, float(ev[j, 1]))
        return out

    def integral(self) -> float:
        k = self.k
        total = 0.0
        for (a, b), l in zip(self.coeffs, self.graph.lengths):
            if k == 0.0:
                total += a * l
            else:
                total += (a * math.sin(k * l) + b * (1.0 - math.cos(k * l))) / k
        return total

    def norm_squared(self) -> float:
        c = self.coeffs.reshape(-1)
        return float(c @ _gram(self.graph, self.k) @ c)

    def residuals(self) -> dict[str, float]:
        """Largest violation of continuity, Kirchhoff and Dirichlet conditions."""
        mg = self.graph
        ev = self.end_values()
        cont = kirch = dirich = 0.0
        for v, ends in enumerate(_vertex_ends(mg)):
            if not ends:
                continue
            vals = [ev[j, int(at_end)] for j, at_end in ends]
            if v in mg.dirichlet:
                dirich = max(dirich, max(abs(x) for x in vals))
                continue
            cont = max(cont, max(vals) - min(vals))
            flux = 0.0
            for j, at_end in ends:
                d = self.derivative(j, mg.edges[j].length if at_end else 0.0)
                flux += -d if at_end else d
            kirch = max(kirch, abs(flux))
        return {"continuity": float(cont), "kirchhoff": float(kirch), "dirichlet": float(dirich)}


def _fix_sign(c: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(c) > 1e-10 * max(np.abs(c).max(), 1e-300))
    if nz.size and c[nz[0]] < 0:
        return -c
    return c


def eigenfunctions(mg: MetricGraph, lam: float, tau: float = 1e-7) -> list[Eigenfunction]:
    """L2-orthonormal basis of the eigenspace of ``lam``."""
    if lam < 0:
        raise NotAnEigenvalue("eigenvalues are nonnegative")
    if lam == 0.0:
        return _constant_modes(mg)
    k = math.sqrt(lam)
    M = secular_matrix(mg, k, scaled=True)
    _, sv, vt = np.linalg.svd(M)
    null = vt[sv <= tau * max(sv[0], 1.0)].T
    if null.shape[1] == 0:
        raise NotAnEigenvalue(f"smallest singular value {sv[-1]:.3e} exceeds the threshold at k={k}")
    gram = null.T @ _gram(mg, k) @ null
    w, U = np.linalg.eigh(0.5 * (gram + gram.T))
    basis = null @ U @ np.diag(1.0 / np.sqrt(w))
    return [Eigenfunction(mg, k, _fix_sign(basis[:, i]).reshape(mg.E, 2)) for i in range(basis.shape[1])]


def eigenfunction(mg: MetricGraph, lam: float, tau: float = 1e-7) -> Eigenfunction:
    return eigenfunctions(mg, lam, tau)[0]


def _constant_modes(mg: MetricGraph) -> list[Eigenfunction]:
    labels = component_labels(mg)
    deg = mg.degrees()
    blocked = {labels[v] for v in mg.dirichlet}
    comps = sorted({labels[v] for v in range(mg.V) if deg[v] > 0} - blocked)
    if not comps:
        raise NotAnEigenvalue("0 is not an eigenvalue with Dirichlet conditions on every component")
    out = []
    for c in comps:
        on = np.array([labels[e.u] == c for e in mg.edges], dtype=float)
        size = float(np.sum(on * mg.lengths))
        coeffs = np.zeros((mg.E, 2))
        coeffs[:, 0] = on / math.sqrt(size)
        out.append(Eigenfunction(mg, 0.0, coeffs))
    return out


# ---------------------------------------------------------------------------
# Level sets


def _solutions_in(c: float, th0: float, th1: float) -> int:
    # number of theta in [th0, th1] with cos(theta) = c
    if abs(c) > 1.0:
        return 0
    alpha = math.acos(c)
    roots = (alpha,) if alpha in (0.0, math.pi) else (alpha, -alpha)
    n = 0
    two_pi = 2.0 * math.pi
    for r in roots:
        n += max(0, math.floor((th1 - r) / two_pi) - math.ceil((th0 - r) / two_pi) + 1)
    return n


def edge_level_points(psi: Eigenfunction, edge: int, t: float) -> list[float]:
    """Points x on the edge with psi(x) = t (finite unless psi is constant there)."""
    a, b = psi.coeffs[edge]
    l = psi.graph.edges[edge].length
    k = psi.k
    R = math.hypot(a, b)
    if R == 0.0 or k == 0.0 or abs(t) > R:
        return []
    phase = math.atan2(b, a)
    alpha = math.acos(max(-1.0, min(1.0, t / R)))
    th0, th1 = -phase, k * l - phase
    pts = []
    two_pi = 2.0 * math.pi
    for r in {alpha, -alpha}:
        m0 = math.ceil((th0 - r) / two_pi)
        m1 = math.floor((th1 - r) / two_pi)
        for m in range(m0, m1 + 1):
            pts.append((r + two_pi * m + phase) / k)
    return sorted(min(max(x, 0.0), l) for x in pts)


def edge_extrema(psi: Eigenfunction, edge: int) -> list[float]:
    """Interior critical values of psi on an edge."""
    a, b = psi.coeffs[edge]
    R = math.hypot(a, b)
    if R == 0.0 or psi.k == 0.0:
        return []
    pts = edge_level_points(psi, edge, R) + edge_level_points(psi, edge, -R)
    l = psi.graph.edges[edge].length
    return [float(psi(edge, x)) for x in pts if 0.0 < x < l]


def level_count(psi: Eigenfunction, t: float) -> float:
    """Number of points where psi equals t; inf if psi is identically t on an edge."""
    total = 0
    k = psi.k
    for j, ((a, b), l) in enumerate(zip(psi.coeffs, psi.graph.lengths)):
        R = math.hypot(a, b)
        if k == 0.0 or R <= 1e-14:
            if abs(a - t) <= 1e-12:
                return math.inf
            continue
        phase = math.atan2(b, a)
        total += _solutions_in(t / R, -phase, k * l - phase)
    # points counted on several edges are vertices; those t are excluded by callers
    return total


def level_counts(psi: Eigenfunction, t_grid) -> list[float]:
    return [level_count(psi, float(t)) for t in t_grid]


@dataclass(frozen=True)
class LevelData:
    exceptional: tuple[float, ...]
    vertex_values: tuple[float, ...]
    minimum: float
    maximum: float
    grid: tuple[float, ...]


def level_grid(psi: Eigenfunction, min_gap: float = 1e-7) -> LevelData:
    """Midpoints between consecutive breakpoints of t -> nu(t).

    Breakpoints are the vertex values and every interior extremum on the
    edges, so nu is constant between consecutive grid points' neighbours.
    """
    vertex_vals = sorted(psi.vertex_values().values())
    interior = [x for j in range(psi.graph.E) for x in edge_extrema(psi, j)]
    all_vals = vertex_vals + interior
    lo, hi = min(all_vals), max(all_vals)
    breaks = sorted(set(all_vals))
    scale = max(hi - lo, 1e-300)
    grid = [0.5 * (s + t) for s, t in zip(breaks, breaks[1:]) if t - s > min_gap * scale]
    exceptional = tuple(sorted(set(vertex_vals) | {lo, hi}))
    return LevelData(exceptional, tuple(vertex_vals), lo, hi, tuple(grid))


# ---------------------------------------------------------------------------
# von Below transference and Rayleigh quotients


@dataclass(frozen=True)
class VonBelowSpectrum:
    eigenvalues: tuple[float, ...]
    excluded_alpha_two: int
    nonbipartite_unicyclic: bool


def von_below_spectrum(g: CombinatorialGraph, atol: float = 1e-10) -> VonBelowSpectrum:
    """Eigenvalues in (0, pi^2) of the unit-length metrization of g.

    Each normalized-Laplacian eigenvalue alpha in (0, 2) gives
    ``lambda = arccos(1 - alpha)**2``.
    """
    if isinstance(g, MetricGraph):
        g = underlying_combinatorial(g)
    alphas = normalized_spectrum(g).eigenvalues
    lams = []
    excluded = 0
    for a in alphas:
        if a <= atol:
            continue
        if a >= 2.0 - atol:
            excluded += 1
            continue
        lams.append(math.acos(1.0 - a) ** 2)
    unicyclic = g.E == g.V and not g.is_bipartite()
    return VonBelowSpectrum(tuple(sorted(lams)), excluded, unicyclic)


def rayleigh_quotient(mg: MetricGraph, samples) -> float:
    """Exact Rayleigh quotient of a piecewise-linear function.

    ``samples[e]`` lists the values at equally spaced nodes along edge e,
    including both endpoints.
    """
    num = den = 0.0
    for e, f in zip(mg.edges, samples):
        f = np.asarray(f, dtype=float)
        if f.size < 2:
            raise ValueError("each edge needs at least two samples")
        h = e.length / (f.size - 1)
        a, b = f[:-1], f[1:]
        num += float(np.sum((b - a) ** 2) / h)
        den += float(np.sum(a * a + a * b + b * b) * h / 3.0)
    if den <= 0.0:
        raise ZeroFunction("function vanishes identically")
    return num / den

