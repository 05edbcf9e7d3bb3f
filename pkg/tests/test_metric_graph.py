import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qgraph import generators as G
from qgraph.errors import HasLoops, NoLeaves
from qgraph.generators import complete, star
from qgraph.metric_graph import (Edge, MetricGraph, discrete_edge_connectivity, leaf_diameter, longest_edge,
                                 metric_diameter, metric_edge_connectivity, shortest_edge, suppress_degree_two,
                                 total_length, underlying_combinatorial, validate)


def subdivide(mg, edge, t):
    """Insert a natural vertex at fraction t of the given edge."""
    e = mg.edges[edge]
    v = mg.V
    new = list(mg.edges)
    new[edge] = Edge(e.u, v, t * e.length)
    new.append(Edge(v, e.w, (1 - t) * e.length))
    return MetricGraph(v + 1, tuple(new), mg.dirichlet)


def flip(mg, mask):
    return MetricGraph(mg.V, tuple(Edge(e.w, e.u, e.length) if m else e for e, m in zip(mg.edges, mask)),
                       mg.dirichlet)


def kinds(mg):
    return {v.kind for v in validate(mg)}


class TestValidate:
    def test_single_loop(self):
        assert validate(G.cycle(1.0)) == []

    def test_zero_length(self):
        mg = MetricGraph.from_edges(2, [(0, 1, 0.0)])
        assert kinds(mg) == {"NonPositiveLength"}
        assert validate(mg)[0].where == "edge 0"

    def test_disjoint_edges(self):
        assert "Disconnected" in kinds(MetricGraph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]))

    def test_isolated_vertex(self):
        assert "IsolatedVertex" in kinds(MetricGraph.from_edges(3, [(0, 1, 1.0)]))

    def test_no_edges(self):
        assert kinds(MetricGraph(1, ())) == {"NoEdges"}


class TestSuppression:
    def test_two_edge_path(self):
        red = suppress_degree_two(MetricGraph.from_edges(3, [(0, 1, 0.4), (1, 2, 1.1)]))
        assert red.V == 2 and red.E == 1
        assert red.edges[0].length == pytest.approx(1.5)

    def test_triangle(self):
        red = suppress_degree_two(G.metrize(complete(3)))
        assert red.V == 1 and red.E == 1 and red.edges[0].is_loop
        assert red.edges[0].length == pytest.approx(3.0)

    def test_triangle_with_dirichlet_vertex(self):
        tri = MetricGraph(3, G.metrize(complete(3)).edges, frozenset({0}))
        red = suppress_degree_two(tri)
        assert red.V == 1 and red.dirichlet == frozenset({0})
        assert red.edges[0].is_loop and red.edges[0].length == pytest.approx(3.0)

    def test_dirichlet_vertex_kept(self):
        mg = MetricGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)], dirichlet=[1])
        assert suppress_degree_two(mg) == mg

    @given(st.integers(0, 2 ** 32 - 1))
    def test_idempotent_and_preserves_length(self, seed):
        mg = G.random_metric_graph(np.random.default_rng(seed))
        red = suppress_degree_two(mg)
        assert suppress_degree_two(red) == red
        assert total_length(red) == pytest.approx(total_length(mg), rel=1e-14)
        assert metric_diameter(red) == pytest.approx(metric_diameter(mg), rel=1e-12)
        deg = red.degrees()
        if red.V > 1:
            assert all(deg[v] != 2 or v in red.dirichlet for v in range(red.V))


class TestConnectivity:
    def test_interval(self):
        assert metric_edge_connectivity(G.interval(1.0)) == 1

    def test_circle(self):
        assert metric_edge_connectivity(G.cycle(2.0)) == 2

    def test_lollipop(self):
        lol = G.lollipop(1.0, 0.5)
        assert metric_edge_connectivity(lol) == 1
        assert discrete_edge_connectivity(lol) == 1

    @pytest.mark.parametrize("eta", [2, 3, 4, 5])
    def test_regular_pumpkin_chain(self, eta):
        assert discrete_edge_connectivity(G.regular_pumpkin_chain(eta, 3, 1.0)) == eta

    @pytest.mark.parametrize("loops", [1, 2, 5])
    def test_flower(self, loops):
        assert discrete_edge_connectivity(G.flower([1.0] * loops)) == 2

    @given(st.integers(0, 2 ** 32 - 1), st.floats(0.05, 0.95))
    def test_subdivision_invariance(self, seed, t):
        rng = np.random.default_rng(seed)
        mg = G.random_metric_graph(rng)
        sub = subdivide(mg, int(rng.integers(mg.E)), t)
        assert discrete_edge_connectivity(sub) == discrete_edge_connectivity(mg)
        assert metric_edge_connectivity(sub) == metric_edge_connectivity(mg)

    @given(st.integers(0, 2 ** 32 - 1))
    def test_metric_at_most_two_and_agrees(self, seed):
        mg = G.random_metric_graph(np.random.default_rng(seed))
        m, eta = metric_edge_connectivity(mg), discrete_edge_connectivity(mg)
        assert m in (1, 2)
        if eta <= 2:
            assert m == eta
        else:
            assert m == 2


class TestLengths:
    def test_three_edges(self):
        mg = G.metric_star([1.0, 2.0, 3.0])
        assert (total_length(mg), longest_edge(mg), shortest_edge(mg)) == (6.0, 3.0, 1.0)

    def test_circle(self):
        assert total_length(G.cycle(2 * math.pi)) == 2 * math.pi

    def test_pumpkin(self):
        mg = G.pumpkin([0.5] * 3)
        assert total_length(mg) == 1.5 and longest_edge(mg) == 0.5


class TestDiameters:
    def test_interval(self):
        mg = G.interval(1.0)
        assert metric_diameter(mg) == 1.0 == leaf_diameter(mg)

    @pytest.mark.parametrize("L", [1.0, 2 * math.pi, 7.5])
    def test_circle(self, L):
        assert metric_diameter(G.cycle(L)) == pytest.approx(L / 2)

    def test_star(self, unit_star):
        assert metric_diameter(unit_star) == pytest.approx(2.0)
        assert leaf_diameter(unit_star) == pytest.approx(2.0)

    def test_no_leaves(self):
        with pytest.raises(NoLeaves):
            leaf_diameter(G.cycle(1.0))

    def test_pumpkin_interior_points(self):
        # two edges of length 1 and 3 form a circle of length 4
        assert metric_diameter(G.pumpkin([1.0, 3.0])) == pytest.approx(2.0)

    def test_sampled_lower_bound(self, random_metric_graphs):
        # brute-force distances between sample points never exceed the closed form
        from scipy.sparse.csgraph import shortest_path
        for mg in random_metric_graphs[:10]:
            rows, cols, w = [], [], []
            n = mg.V
            for e in mg.edges:
                m = 12
                chain = [e.u] + list(range(n, n + m - 1)) + [e.w]
                n += m - 1
                for a, b in zip(chain, chain[1:]):
                    rows.append(a), cols.append(b), w.append(e.length / m)
            A = np.zeros((n, n))
            for a, b, x in zip(rows, cols, w):
                if a != b and (A[a, b] == 0 or x < A[a, b]):
                    A[a, b] = A[b, a] = x
            d = shortest_path(A, directed=False)
            assert d.max() <= metric_diameter(mg) + 1e-9
            assert d.max() >= metric_diameter(mg) - max(mg.lengths) / 12 - 1e-9

    @given(st.integers(0, 2 ** 32 - 1))
    def test_point_diameter_dominates_leaf_diameter(self, seed):
        mg = G.random_metric_tree(np.random.default_rng(seed), 6)
        assert metric_diameter(mg) >= leaf_diameter(mg) - 1e-12


class TestUnderlying:
    def test_star(self, unit_star):
        assert underlying_combinatorial(unit_star) == star(3)

    def test_circle(self):
        with pytest.raises(HasLoops):
            underlying_combinatorial(suppress_degree_two(G.cycle(1.0)))

    def test_k4(self):
        assert underlying_combinatorial(G.metrize(complete(4))) == complete(4)


@given(st.integers(0, 2 ** 32 - 1))
def test_orientation_does_not_matter(seed):
    from qgraph.spectral_solver import eigenvalues
    rng = np.random.default_rng(seed)
    mg = G.random_metric_graph(rng, max_edges=6)
    flipped = flip(mg, rng.random(mg.E) < 0.5)
    assert metric_diameter(flipped) == pytest.approx(metric_diameter(mg))
    assert discrete_edge_connectivity(flipped) == discrete_edge_connectivity(mg)
    a, b = eigenvalues(mg, 6).eigenvalues, eigenvalues(flipped, 6).eigenvalues
    assert np.allclose(a, b, rtol=1e-8, atol=1e-12)
