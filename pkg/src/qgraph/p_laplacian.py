"""p-Laplacian quantities: p-trigonometric functions and Rayleigh quotients.

The discrete quotient of a vertex function f is

    R(f) = sum_edges |f(u) - f(w)|^p / min_c sum_vertices |f(v) - c|^p,

and its metric analogue replaces the sums by integrals. Both are minimized
with L-BFGS from several starting points; for p != 2 the landscape is not
convex, so every returned value is an upper bound for the true minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg, optimize, special

from .errors import BadParameter, NonConvergence
from .graph_core import CombinatorialGraph, laplacian_matrix
from .metric_graph import MetricGraph


def check_p(p: float) -> float:
    p = float(p)
    if not (1.0 < p < math.inf):
        raise BadParameter(f"p must lie in (1, inf), got {p}")
    return p


def dual_exponent(p: float) -> float:
    p = check_p(p)
    return p / (p - 1.0)


def pi_p(p: float) -> float:
    p = check_p(p)
    return 2.0 * math.pi / (p * math.sin(math.pi / p))


def _tail_integral(p: float, a: float) -> float:
    # int_a^1 (1 - s^p)^(-1/p) ds with the endpoint singularity (1 - s)^(-1/p) as a quadrature weight
    def smooth(s):
        gap = 1.0 - s
        if gap <= 0.0:
            return p ** (-1.0 / p)
        return (-math.expm1(p * math.log1p(-gap)) / gap) ** (-1.0 / p)

    width = 1.0 - a
    if width <= 1e-6:
        return smooth(a) * width ** (1.0 - 1.0 / p) / (1.0 - 1.0 / p)
    val, _ = integrate.quad(smooth, a, 1.0, weight="alg", wvar=(0.0, -1.0 / p), epsabs=1e-14, epsrel=1e-13,
                            limit=200)
    return val


def pi_p_quadrature(p: float) -> float:
    """``2 * int_0^1 (1 - s^p)^(-1/p) ds`` by adaptive quadrature."""
    p = check_p(p)
    return 2.0 * _tail_integral(p, 0.0)


def arcsin_p(p: float, y: float) -> float:
    """``int_0^y (1 - s^p)^(-1/p) ds`` for y in [0, 1], by quadrature."""
    p = check_p(p)
    if not 0.0 <= y <= 1.0:
        raise BadParameter(f"arcsin_p needs y in [0, 1], got {y}")
    if y <= 0.5:
        val, _ = integrate.quad(lambda s: (1.0 - s ** p) ** (-1.0 / p), 0.0, y, epsabs=1e-14, epsrel=1e-13)
        return val
    return _tail_integral(p, 0.0) - _tail_integral(p, y)


def sin_p(p: float, x):
    """Generalized sine: odd, 2 pi_p periodic, symmetric about pi_p / 2.

    On [0, pi_p / 2] it inverts ``arcsin_p``; the inverse is evaluated via
    the regularized incomplete beta function, since
    ``arcsin_p(y) = (pi_p / 2) * I(y^p; 1/p, 1 - 1/p)``.
    """
    p = check_p(p)
    half = pi_p(p)
    x = np.asarray(x, dtype=float)
    r = np.mod(x, 2.0 * half)
    sign = np.where(r > half, -1.0, 1.0)
    r = np.where(r > half, r - half, r)
    r = np.where(r > 0.5 * half, half - r, r)
    frac = np.clip(r / (0.5 * half), 0.0, 1.0)
    y = special.betaincinv(1.0 / p, 1.0 - 1.0 / p, frac) ** (1.0 / p)
    out = sign * y
    return float(out) if out.ndim == 0 else out


def interval_eigenvalue_p(p: float, length: float, bc: str = "NN") -> float:
    """Lowest nonzero eigenvalue of the p-Laplacian on an interval."""
    p = check_p(p)
    if length <= 0:
        raise BadParameter("interval length must be positive")
    bc = bc.upper()
    if bc in ("NN", "DD"):
        return (p - 1.0) * (pi_p(p) / length) ** p
    if bc in ("DN", "ND"):
        return (p - 1.0) * (pi_p(p) / (2.0 * length)) ** p
    raise BadParameter(f"unknown boundary conditions {bc!r}")


def center_p(values, p: float, rtol: float = 1e-12) -> float:
    """Minimizer of ``c -> sum |v - c|^p`` by bracketed root finding on its derivative."""
    p = check_p(p)
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise BadParameter("center of an empty list")
    lo, hi = float(v.min()), float(v.max())
    if p == 2.0:
        return float(v.mean())
    if hi == lo:
        return lo

    def slope(c):
        d = v - c
        return float(np.sum(np.abs(d) ** (p - 1.0) * np.sign(d)))

    return _bracketed_root(slope, lo, hi, rtol * (hi - lo))


def _bracketed_root(fn, lo, hi, xtol):
    # fn decreases from >= 0 at lo to <= 0 at hi
    flo, fhi = fn(lo), fn(hi)
    if flo <= 0:
        return lo
    if fhi >= 0:
        return hi
    return optimize.brentq(fn, lo, hi, xtol=max(xtol, 1e-300), rtol=4 * np.finfo(float).eps, maxiter=200)


def _signed_pow(x, q):
    return np.abs(x) ** q * np.sign(x)


# ---------------------------------------------------------------------------
# discrete quotient


class DiscreteQuotient:
    """Rayleigh quotient of the discrete p-Laplacian on a fixed graph."""

    def __init__(self, g: CombinatorialGraph, p: float):
        self.g = g
        self.p = check_p(p)
        self.u = np.array([e[0] for e in g.edges], dtype=int)
        self.w = np.array([e[1] for e in g.edges], dtype=int)

    def numerator(self, f):
        return float(np.sum(np.abs(f[self.u] - f[self.w]) ** self.p))

    def denominator(self, f):
        c = center_p(f, self.p)
        return float(np.sum(np.abs(f - c) ** self.p)), c

    def __call__(self, f) -> float:
        f = np.asarray(f, dtype=float)
        den, _ = self.denominator(f)
        return self.numerator(f) / den

    def value_and_grad(self, f):
        f = np.asarray(f, dtype=float)
        p = self.p
        d = f[self.u] - f[self.w]
        num = float(np.sum(np.abs(d) ** p))
        flux = p * _signed_pow(d, p - 1.0)
        gnum = np.zeros_like(f)
        np.add.at(gnum, self.u, flux)
        np.add.at(gnum, self.w, -flux)
        den, c = self.denominator(f)
        gden = p * _signed_pow(f - c, p - 1.0)
        r = num / den
        return r, (gnum - r * gden) / den

    def residual(self, f, value: float) -> float:
        """Sup norm of ``L_p f - value |f - c|^(p-2) (f - c)`` with f scaled to unit p-norm."""
        f = np.asarray(f, dtype=float)
        den, c = self.denominator(f)
        f = (f - c) / den ** (1.0 / self.p)
        d = f[self.u] - f[self.w]
        lp = np.zeros_like(f)
        flux = _signed_pow(d, self.p - 1.0)
        np.add.at(lp, self.u, flux)
        np.add.at(lp, self.w, -flux)
        return float(np.max(np.abs(lp - value * _signed_pow(f, self.p - 1.0))))


@dataclass(frozen=True)
class PResult:
    value: float
    minimizer: np.ndarray
    gradient_norm: float
    residual: float
    converged_restarts: int
    restarts: int


def _normalize(f, p):
    c = center_p(f, p)
    f = f - c
    s = np.sum(np.abs(f) ** p) ** (1.0 / p)
    return f / s if s > 0 else f


def _run_lbfgs(fun, x0, maxiter):
    res = optimize.minimize(fun, x0, jac=True, method="L-BFGS-B",
                            options={"maxiter": maxiter, "gtol": 1e-13, "ftol": 1e-15, "maxcor": 30})
    return res.x


def _newton(fun, x, renorm, steps=6):
    # Newton steps on a central-difference Hessian; the quotient is invariant
    # under scaling and shifts, so the least-squares solve ignores that null space
    r, g = fun(x)
    gnorm = np.linalg.norm(g)
    n = x.size
    for _ in range(steps):
        h = 1e-6 * max(np.abs(x).max(), 1e-300)
        H = np.empty((n, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            H[:, i] = (fun(x + e)[1] - fun(x - e)[1]) / (2 * h)
        step = np.linalg.lstsq(0.5 * (H + H.T), -g, rcond=1e-10)[0]
        y = renorm(x + step)
        r2, g2 = fun(y)
        if not (np.linalg.norm(g2) < gnorm and r2 <= r + 1e-14 * abs(r)):
            break
        x, r, g, gnorm = y, r2, g2, np.linalg.norm(g2)
    return x


def _tie_groups(x, rtol=1e-8):
    # assignment matrix merging vertices whose values agree up to rtol * range
    order = np.argsort(x)
    label = np.empty(x.size, dtype=int)
    scale = max(float(np.ptp(x)), 1e-300)
    c = 0
    for i, v in enumerate(order):
        if i and x[v] - x[order[i - 1]] > rtol * scale:
            c += 1
        label[v] = c
    P = np.zeros((x.size, c + 1))
    P[np.arange(x.size), label] = 1.0
    return P


def _polish(q: "DiscreteQuotient", x, p):
    """Refine an approximate minimizer to a small gradient.

    For p < 2 the gradient is only Hoelder continuous where neighbouring
    values coincide, so near-ties are first merged and Newton runs on the
    merged values, where the quotient is smooth.
    """
    def renorm(y):
        return _normalize(y, p)

    candidates = [_newton(q.value_and_grad, x, renorm)]
    if p < 2.0:
        P = _tie_groups(x)
        if P.shape[1] < x.size:
            def reduced(z):
                r, g = q.value_and_grad(P @ z)
                return r, P.T @ g

            z = (P.T @ x) / P.sum(axis=0)
            z = _newton(reduced, z, lambda z: z / max(np.sum(np.abs(P @ z - center_p(P @ z, p)) ** p), 1e-300)
                        ** (1.0 / p))
            candidates.append(_normalize(P @ z, p))
    r0, g0 = q.value_and_grad(x)
    best, best_norm = x, np.linalg.norm(g0)
    for y in candidates:
        r, g = q.value_and_grad(y)
        if np.linalg.norm(g) < best_norm and r <= r0 + 1e-14 * abs(r0):
            best, best_norm = y, np.linalg.norm(g)
    return best


def fiedler_vector(g: CombinatorialGraph) -> np.ndarray:
    _, vecs = np.linalg.eigh(laplacian_matrix(g))
    return vecs[:, 1]


def discrete_gamma1_p(g: CombinatorialGraph, p: float, restarts: int = 32, seed: int = 0,
                      gtol: float = 1e-9, maxiter: int = 3000, strict: bool = True) -> PResult:
    """Smallest nonzero eigenvalue of the discrete p-Laplacian (upper approximation).

    Starts from the p = 2 Fiedler vector and ``restarts`` random vectors, each
    drawn from its own generator seeded by ``(seed, index)``.
    """
    p = check_p(p)
    if g.V < 2:
        raise BadParameter("need at least two vertices")
    q = DiscreteQuotient(g, p)
    fun = q.value_and_grad

    starts = [fiedler_vector(g)]
    for i in range(restarts):
        rng = np.random.default_rng([seed, i])
        starts.append(rng.standard_normal(g.V))

    best = None
    converged = 0
    for x0 in starts:
        x0 = _normalize(x0, p)
        if np.ptp(x0) == 0:
            continue
        x = _normalize(_run_lbfgs(fun, x0, maxiter), p)
        x = _normalize(_run_lbfgs(fun, x, maxiter), p)
        r, grad = q.value_and_grad(x)
        if np.linalg.norm(grad) > gtol:
            x = _polish(q, x, p)
            r, grad = q.value_and_grad(x)
        gnorm = float(np.linalg.norm(grad))
        ok = gnorm <= gtol
        converged += ok
        key = (r, 0 if ok else 1)
        if best is None or key < best[0]:
            best = (key, x, gnorm)
    if strict and converged == 0:
        raise NonConvergence(f"gradient norm stayed above {gtol} on every start")
    (value, _), x, gnorm = best
    return PResult(float(value), x, gnorm, q.residual(x, value), converged, len(starts))


# ---------------------------------------------------------------------------
# metric quotient on a piecewise-linear mesh


def _segment_power_integral(a, b, p):
    """Mean of |u|^p over the linear segment from a to b, with its partial derivatives."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    m = 0.5 * (a + b)
    small = np.abs(d) <= 1e-5 * (np.abs(a) + np.abs(b)) + 1e-300
    dd = np.where(small, 1.0, d)
    phi_b = np.abs(b) ** p * b / (p + 1.0)
    phi_a = np.abs(a) ** p * a / (p + 1.0)
    G = (phi_b - phi_a) / dd
    ga = (G - np.abs(a) ** p) / dd
    gb = (np.abs(b) ** p - G) / dd
    # midpoint expansion where the segment is nearly flat (|m| >> |d| there)
    am = np.where(small, np.abs(m), 1.0)
    Gs = am ** p + p * (p - 1.0) * am ** (p - 2.0) * d * d / 24.0
    gs = 0.5 * p * am ** (p - 2.0) * m
    G = np.where(small, np.where(am > 0, Gs, 0.0), G)
    ga = np.where(small, np.where(am > 0, gs, 0.0), ga)
    gb = np.where(small, np.where(am > 0, gs, 0.0), gb)
    return G, ga, gb


@dataclass
class Mesh:
    """Uniform subdivision of every edge into ``n`` segments."""

    graph: MetricGraph
    n: int

    def __post_init__(self):
        mg, n = self.graph, self.n
        self.node_count = mg.V + mg.E * (n - 1)
        seg_a, seg_b, seg_h = [], [], []
        for j, e in enumerate(mg.edges):
            base = mg.V + j * (n - 1)
            nodes = [e.u] + [base + i for i in range(n - 1)] + [e.w]
            seg_a += nodes[:-1]
            seg_b += nodes[1:]
            seg_h += [e.length / n] * n
        self.a = np.array(seg_a, dtype=int)
        self.b = np.array(seg_b, dtype=int)
        self.h = np.array(seg_h)
        self.pinned = np.array(sorted(mg.dirichlet), dtype=int)
        mask = np.ones(self.node_count, dtype=bool)
        mask[self.pinned] = False
        self.free = np.flatnonzero(mask)

    def edge_nodes(self, j: int) -> np.ndarray:
        e = self.graph.edges[j]
        base = self.graph.V + j * (self.n - 1)
        return np.array([e.u] + list(range(base, base + self.n - 1)) + [e.w])

    def expand(self, x):
        u = np.zeros(self.node_count)
        u[self.free] = x
        return u

    def refine(self, u) -> np.ndarray:
        """Nodal values of the same piecewise-linear function on the mesh with 2n segments."""
        fine = Mesh(self.graph, 2 * self.n)
        out = np.zeros(fine.node_count)
        out[: self.graph.V] = u[: self.graph.V]
        for j in range(self.graph.E):
            coarse = u[self.edge_nodes(j)]
            vals = np.empty(2 * self.n + 1)
            vals[0::2] = coarse
            vals[1::2] = 0.5 * (coarse[:-1] + coarse[1:])
            out[fine.edge_nodes(j)[1:-1]] = vals[1:-1]
        return out

    def fem_matrices(self):
        N = self.node_count
        K = np.zeros((N, N))
        M = np.zeros((N, N))
        for a, b, h in zip(self.a, self.b, self.h):
            K[a, a] += 1 / h
            K[b, b] += 1 / h
            K[a, b] -= 1 / h
            K[b, a] -= 1 / h
            M[a, a] += h / 3
            M[b, b] += h / 3
            M[a, b] += h / 6
            M[b, a] += h / 6
        return K, M


class MetricQuotient:
    """``int |u'|^p / min_c int |u - c|^p`` for piecewise-linear u.

    With Dirichlet vertices the centring is dropped and those nodes are held
    at zero.
    """

    def __init__(self, mesh: Mesh, p: float):
        self.mesh = mesh
        self.p = check_p(p)
        self.centred = len(mesh.pinned) == 0

    def _den(self, u, c):
        G, ga, gb = _segment_power_integral(u[self.mesh.a] - c, u[self.mesh.b] - c, self.p)
        return G, ga, gb

    def center(self, u) -> float:
        if not self.centred:
            return 0.0
        lo, hi = float(u.min()), float(u.max())
        if hi == lo:
            return lo
        h = self.mesh.h

        def slope(c):
            _, ga, gb = self._den(u, c)
            return float(np.sum(h * (ga + gb)))

        return _bracketed_root(slope, lo, hi, 1e-13 * (hi - lo))

    def value_and_grad_full(self, u):
        p, m = self.p, self.mesh
        d = u[m.b] - u[m.a]
        num_terms = np.abs(d) ** p / m.h ** (p - 1.0)
        num = float(np.sum(num_terms))
        flux = p * _signed_pow(d, p - 1.0) / m.h ** (p - 1.0)
        gnum = np.zeros_like(u)
        np.add.at(gnum, m.b, flux)
        np.add.at(gnum, m.a, -flux)
        c = self.center(u)
        G, ga, gb = self._den(u, c)
        den = float(np.sum(m.h * G))
        gden = np.zeros_like(u)
        np.add.at(gden, m.a, m.h * ga)
        np.add.at(gden, m.b, m.h * gb)
        r = num / den
        return r, (gnum - r * gden) / den

    def __call__(self, u) -> float:
        return self.value_and_grad_full(np.asarray(u, dtype=float))[0]

    def value_and_grad(self, x):
        r, g = self.value_and_grad_full(self.mesh.expand(x))
        return r, g[self.mesh.free]

    def normalize(self, x):
        u = self.mesh.expand(x)
        c = self.center(u)
        if self.centred:
            u = u - c
        G, _, _ = self._den(u, 0.0)
        s = float(np.sum(self.mesh.h * G)) ** (1.0 / self.p)
        return (u / s)[self.mesh.free] if s > 0 else x


@dataclass(frozen=True)
class MeshResult:
    value: float
    nodal_values: np.ndarray
    mesh_n: int
    gradient_norm: float


def _p2_start(mesh: Mesh) -> np.ndarray:
    K, M = mesh.fem_matrices()
    f = mesh.free
    vals, vecs = linalg.eigh(K[np.ix_(f, f)], M[np.ix_(f, f)])
    idx = 1 if len(mesh.pinned) == 0 else 0
    return vecs[:, min(idx, vecs.shape[1] - 1)]


def metric_mu1_p_upper(mg: MetricGraph, p: float, mesh_n: int = 32, restarts: int = 4, seed: int = 0,
                       gtol: float = 1e-9, maxiter: int = 5000, strict: bool = False,
                       start=None) -> MeshResult:
    """Upper approximation of the first nontrivial p-eigenvalue of a metric graph.

    Meshes are refined by doubling from the coarsest even level at least 4
    (or ``mesh_n`` itself when odd), each level starting from the previous
    optimum, so results on nested meshes never increase.
    """
    p = check_p(p)
    if mesh_n < 4:
        raise BadParameter("mesh_n must be at least 4")
    if start is None and mesh_n % 2 == 0 and mesh_n // 2 >= 4:
        coarse = metric_mu1_p_upper(mg, p, mesh_n // 2, restarts, seed, gtol, maxiter, strict)
        start = Mesh(mg, mesh_n // 2).refine(coarse.nodal_values)
    mesh = Mesh(mg, mesh_n)
    q = MetricQuotient(mesh, p)

    starts = [] if start is None else [np.asarray(start, dtype=float)[mesh.free]]
    starts.append(_p2_start(mesh))
    for i in range(restarts):
        rng = np.random.default_rng([seed, mesh_n, i])
        starts.append(rng.standard_normal(mesh.free.size))

    best = None
    converged = 0
    for x0 in starts:
        if np.ptp(x0) == 0 and q.centred:
            continue
        x = q.normalize(x0)
        for _ in range(2):
            x = q.normalize(_run_lbfgs(q.value_and_grad, x, maxiter))
        r, grad = q.value_and_grad(x)
        gnorm = float(np.linalg.norm(grad))
        converged += gnorm <= gtol
        if best is None or r < best[0]:
            best = (r, x, gnorm)
    if strict and converged == 0:
        raise NonConvergence(f"gradient norm stayed above {gtol} on every start")
    r, x, gnorm = best
    return MeshResult(float(r), mesh.expand(x), mesh_n, gnorm)
