import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qgraph import generators as G
from qgraph.errors import (BadParameter, BadRange, BadSubset, DegreeTooLow, GraphError, OutOfRange,
                           WouldDisconnect)
from qgraph.graph_core import CombinatorialGraph, edge_connectivity, laplacian_matrix, spectral_gap
from qgraph.metric_graph import (MetricGraph, betti_number, component_count, discrete_edge_connectivity,
                                 total_length, validate)
from qgraph.spectral_solver import eigenfunction, eigenfunctions, eigenvalues
from qgraph.surgery import (SURGERY_KINDS, SurgeryOp, apply_op, apply_script, attach_pendant, cut_edge,
                            delete_edge, detach_edge_end, dirichlet_split, double_edges, join_vertices,
                            lengthen_edge, reduce_to_pumpkin_chain, replace_edge_by_path,
                            split_dirichlet_vertices, symmetrize_positive_part)

PI2 = math.pi ** 2


def first(mg, n=6):
    return np.asarray(eigenvalues(mg, n).eigenvalues[:n])


def problems(mg):
    return [v for v in validate(mg) if v.kind != "Disconnected"]


def fiedler_vector(g):
    _, vecs = np.linalg.eigh(laplacian_matrix(g))
    return vecs[:, 1]


class TestReplaceEdgeByPath:
    def test_chord_of_path(self):
        g = CombinatorialGraph(3, ((0, 1), (1, 2), (0, 2)))
        out = replace_edge_by_path(g, 2)
        assert sorted(out.edges) == sorted(G.discrete_pumpkin_chain([2, 2]).edges)

    def test_triangle_doubles_edges(self):
        out = replace_edge_by_path(G.complete(3), 1, order=[0, 1, 2])
        assert sorted(tuple(sorted(e)) for e in out.edges) == [(0, 1), (0, 1), (1, 2), (1, 2)]

    def test_adjacent_edge_rejected(self, p3):
        with pytest.raises(BadRange):
            replace_edge_by_path(p3, 0)

    def test_order_must_be_permutation(self):
        with pytest.raises(BadRange):
            replace_edge_by_path(G.complete(3), 1, order=[0, 0, 2])

    def test_quotient_does_not_increase(self, random_multigraphs):
        for g in random_multigraphs[:30]:
            trace = reduce_to_pumpkin_chain(g, fiedler_vector(g))
            q = [s.quotient for s in trace]
            assert all(b <= a + 1e-12 * max(1.0, a) for a, b in zip(q, q[1:]))

    def test_reduction_ends_in_regular_chain(self, random_multigraphs):
        for g in random_multigraphs[:30]:
            f = fiedler_vector(g)
            final = reduce_to_pumpkin_chain(g, f)[-1].graph
            order = list(np.argsort(f, kind="stable"))
            pos = {v: i for i, v in enumerate(order)}
            eta = edge_connectivity(g)
            links = sorted(tuple(sorted((pos[u], pos[w]))) for u, w in final.edges)
            assert links == [(i, i + 1) for i in range(g.V - 1) for _ in range(eta)]

    def test_bad_vector(self, p3):
        with pytest.raises(BadParameter):
            reduce_to_pumpkin_chain(p3, [1.0, 2.0])


class TestDeleteEdge:
    def test_pumpkin(self):
        assert delete_edge(G.pumpkin(3), 0) == G.pumpkin(2)

    def test_combinatorial_bridge(self, p3):
        with pytest.raises(WouldDisconnect):
            delete_edge(p3, 0)

    def test_metric_bridge(self):
        with pytest.raises(WouldDisconnect):
            delete_edge(G.lollipop(1.0, 0.5), 1)

    def test_missing_edge(self):
        with pytest.raises(GraphError):
            delete_edge(G.pumpkin(2), 5)

    def test_gap_does_not_increase(self, rng):
        checked = 0
        while checked < 100:
            V = int(rng.integers(3, 8))
            g = G.random_multigraph(rng, V, int(rng.integers(V, 2 * V + 2)))
            try:
                h = delete_edge(g, int(rng.integers(g.E)))
            except WouldDisconnect:
                continue
            assert spectral_gap(h) <= spectral_gap(g) + 1e-10
            checked += 1


class TestCutEdge:
    def test_interval_at_midpoint(self):
        out = cut_edge(G.interval(1.0), 0, 0.5)
        assert component_count(out) == 2
        assert sorted(out.lengths) == [0.5, 0.5]
        assert problems(out) == []

    @pytest.mark.parametrize("L", [1.0, 2 * math.pi])
    def test_circle_becomes_interval(self, L):
        before = eigenvalues(G.cycle(L), 3).lam(2)
        after = cut_edge(G.cycle(L), 0, 0.3 * L)
        assert before == pytest.approx(4 * PI2 / L ** 2, rel=1e-10)
        assert eigenvalues(after, 3).lam(2) == pytest.approx(PI2 / L ** 2, rel=1e-10)
        assert total_length(after) == pytest.approx(L)

    def test_lollipop_pendant_disconnects(self):
        out = cut_edge(G.lollipop(1.0, 0.5), 1, 0.2)
        assert "Disconnected" in {v.kind for v in validate(out)}

    @pytest.mark.parametrize("x", [0.0, 1.0, -0.1, 2.0])
    def test_out_of_range(self, x):
        with pytest.raises(OutOfRange):
            cut_edge(G.interval(1.0), 0, x)

    def test_eigenvalues_do_not_increase(self, random_metric_graphs, rng):
        for mg in random_metric_graphs[:25]:
            j = int(rng.integers(mg.E))
            out = cut_edge(mg, j, float(rng.uniform(0.1, 0.9)) * mg.edges[j].length)
            assert problems(out) == []
            a, b = first(mg), first(out)
            assert np.all(b <= a + 1e-8 * np.maximum(1.0, a))


class TestDirichletSplit:
    def test_star_one_edge(self, unit_star):
        out = dirichlet_split(unit_star, 0, [0])
        assert component_count(out) == 2
        # an interval with one Dirichlet end, and a natural path of length 2
        lam = first(out, 4)
        expected = sorted([PI2 / 4, 9 * PI2 / 4, 0.0, PI2 / 4, PI2])
        assert np.allclose(lam, expected[:4], rtol=1e-9, atol=1e-10)

    def test_all_edges_rejected(self, unit_star):
        with pytest.raises(BadSubset):
            dirichlet_split(unit_star, 0, [0, 1, 2])

    def test_nonincident_rejected(self, unit_star):
        with pytest.raises(BadSubset):
            dirichlet_split(unit_star, 1, [2])

    def test_empty_is_identity(self, unit_star):
        assert dirichlet_split(unit_star, 0, []) == unit_star

    def test_interlacing(self, rng):
        for _ in range(15):
            mg = G.random_metric_tree(rng, int(rng.integers(4, 8)))
            v = int(np.argmax(mg.degrees()))
            base = eigenvalues(mg, 9)
            for r in (1, 2):
                if r >= mg.degrees()[v]:
                    continue
                split = [eigenvalues(dirichlet_split(mg, v, list(s)), 6) for s in combinations(mg.incident(v), r)]
                for n in range(1, 7):
                    lo = min(s.lam(n) for s in split)
                    hi = max(s.lam(n) for s in split)
                    tol = 1e-8 * max(1.0, base.lam(n + 1))
                    if n > 1:
                        assert base.lam(n - 1) <= lo + tol
                    assert lo <= base.lam(n) + tol and base.lam(n) <= hi + tol
                    assert hi <= base.lam(n + 1) + tol


class TestDoubleEdges:
    def test_interval(self):
        assert double_edges(G.interval(1.0)) == G.pumpkin(2)

    def test_star(self, unit_star):
        out = double_edges(unit_star)
        assert out.E == 6 and discrete_edge_connectivity(out) == 2

    def test_spectra(self, random_metric_graphs):
        for mg in random_metric_graphs[:25]:
            out = double_edges(mg)
            assert out.L == pytest.approx(2 * mg.L)
            assert problems(out) == []
            a, b = first(mg), first(out)
            assert np.all(b <= a + 1e-8 * np.maximum(1.0, a))


class TestDetachEdgeEnd:
    def test_lollipop_becomes_path(self):
        lol = G.lollipop(1.0, 0.5)
        out = detach_edge_end(lol, 0, 0)
        assert (betti_number(lol), betti_number(out)) == (1, 0)
        assert out.E == 2 and component_count(out) == 1
        assert total_length(out) == pytest.approx(1.5)
        # the result is an interval of length 1.5
        assert eigenvalues(out, 3).lam(2) == pytest.approx(PI2 / 1.5 ** 2, rel=1e-10)

    def test_cycle_rejected(self):
        with pytest.raises(DegreeTooLow):
            detach_edge_end(G.cycle(1.0), 0, 0)

    def test_bridge_rejected(self):
        mg = G.pumpkin_dumbbell(2, 0.2)
        with pytest.raises(WouldDisconnect):
            detach_edge_end(mg, 2, 1)

    def test_wrong_vertex(self):
        with pytest.raises(GraphError):
            detach_edge_end(G.pumpkin(3), 0, 5)

    def test_eigenvalues_drop_by_at_most_one_index(self, random_metric_graphs):
        checked = 0
        for mg in random_metric_graphs:
            deg = mg.degrees()
            for j, e in enumerate(mg.edges):
                v = e.u
                if deg[v] < 3:
                    continue
                try:
                    out = detach_edge_end(mg, j, v)
                except WouldDisconnect:
                    continue
                assert betti_number(out) == betti_number(mg) - 1
                a, b = eigenvalues(mg, 7), eigenvalues(out, 8)
                for k in range(1, 8):
                    tol = 1e-8 * max(1.0, a.lam(k))
                    assert b.lam(k) <= a.lam(k) + tol
                    assert a.lam(k) <= b.lam(k + 1) + tol
                checked += 1
                break
        assert checked >= 5


class TestOtherOps:
    def test_join(self):
        out = join_vertices(G.interval(2.0), 0, 1)
        assert out == G.cycle(2.0)

    def test_join_same_vertex(self):
        with pytest.raises(BadParameter):
            join_vertices(G.interval(1.0), 0, 0)

    def test_attach_pendant(self):
        out = attach_pendant(G.cycle(1.0), 0, 0.25)
        assert out == G.lollipop(1.0, 0.25)
        assert attach_pendant(G.cycle(1.0), 0, 0.25, dirichlet=True).dirichlet == frozenset({1})

    def test_lengthen(self):
        out = lengthen_edge(G.interval(1.0), 0, 2.0)
        assert out.L == 2.0
        with pytest.raises(BadParameter):
            lengthen_edge(G.interval(1.0), 0, 0.5)

    def test_split_dirichlet_vertices(self):
        mg = MetricGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], dirichlet=[0])
        out = split_dirichlet_vertices(mg)
        assert out.V == 4 and len(out.dirichlet) == 2
        assert np.allclose(first(out, 5), first(mg, 5), rtol=1e-10, atol=1e-12)


class TestScripts:
    def test_kinds(self):
        assert set(SURGERY_KINDS) == {"ReplaceEdgeByPath", "DeleteEdge", "CutEdge", "JoinVertices",
                                      "DirichletSplit", "DoubleEdges", "AttachPendant", "DetachEdgeEnd",
                                      "LengthenEdge"}

    def test_script(self):
        ops = [SurgeryOp("DoubleEdges"), SurgeryOp("DeleteEdge", {"edge": 1}),
               SurgeryOp("AttachPendant", {"vertex": 1, "length": 0.5})]
        out = apply_script(G.interval(1.0), ops)
        assert out.E == 2 and out.L == pytest.approx(1.5)

    def test_combinatorial_script(self):
        g = CombinatorialGraph(3, ((0, 1), (1, 2), (0, 2)))
        out = apply_op(g, SurgeryOp("ReplaceEdgeByPath", {"edge": 2}))
        assert out.E == 4

    def test_wrong_kind(self, p3):
        with pytest.raises(BadParameter):
            apply_op(p3, SurgeryOp("CutEdge", {"edge": 0, "x": 0.5}))

    def test_missing_parameter(self):
        with pytest.raises(BadParameter):
            apply_op(G.interval(1.0), SurgeryOp("CutEdge", {"edge": 0}))

    @settings(max_examples=30)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_results_validate(self, seed):
        rng = np.random.default_rng(seed)
        mg = G.random_metric_graph(rng, max_edges=6)
        j = int(rng.integers(mg.E))
        e = mg.edges[j]
        candidates = [SurgeryOp("CutEdge", {"edge": j, "x": 0.5 * e.length}), SurgeryOp("DoubleEdges"),
                      SurgeryOp("AttachPendant", {"vertex": e.u, "length": 0.3}),
                      SurgeryOp("LengthenEdge", {"edge": j, "length": 2 * e.length})]
        for op in candidates:
            assert problems(apply_op(mg, op)) == []


class TestGenerators:
    def test_regular_pumpkin_chain(self):
        mg = G.regular_pumpkin_chain(3, 2, 6.0)
        assert discrete_edge_connectivity(mg) == 3
        assert np.allclose(mg.lengths, 1.0)

    @pytest.mark.parametrize("cells,loops", [(3, (0.0, 0.0)), ([0.5, 1.0, 0.25], (0.0, 0.0)),
                                             ([1.0, 0.4], (0.7, 0.0)), (2, (0.3, 0.9))])
    def test_symmetric_necklace_matches_loop(self, cells, loops):
        mg = G.symmetric_necklace(cells, loops)
        assert eigenvalues(mg, 3).lam(2) == pytest.approx(4 * PI2 / mg.L ** 2, rel=1e-8)

    def test_wheel(self):
        assert (G.wheel(6).V, G.wheel(6).E) == (7, 12)

    @pytest.mark.parametrize("n", [3, 5, 8])
    def test_wheel_betti(self, n):
        from qgraph.graph_core import betti_number as graph_betti
        assert graph_betti(G.wheel(n)) == n

    def test_flower(self):
        assert discrete_edge_connectivity(G.flower([1.0, 2.0, 0.5])) == 2

    def test_stower(self):
        mg = G.stower([1.0, 2.0], [0.5, 0.5, 0.5])
        assert (mg.V, mg.E, betti_number(mg)) == (4, 5, 2)

    def test_dumbbell(self):
        mg = G.pumpkin_dumbbell(3, 0.4, 2.0)
        assert mg.E == 7 and mg.L == pytest.approx(2.0)

    @pytest.mark.parametrize("bad", [lambda: G.pumpkin([1.0, -1.0]), lambda: G.wheel(2),
                                     lambda: G.pumpkin_dumbbell(2, 3.0, 1.0), lambda: G.stower([], []),
                                     lambda: G.regular_pumpkin_chain(0, 2, 1.0)])
    def test_bad_parameters(self, bad):
        with pytest.raises(BadParameter):
            bad()

    def test_random_corpora_deterministic(self):
        a = [G.random_metric_graph(np.random.default_rng(3)) for _ in range(3)]
        b = [G.random_metric_graph(np.random.default_rng(3)) for _ in range(3)]
        assert a == b


class TestSymmetrization:
    def test_circle_is_equality(self, circle_2pi):
        lam = eigenvalues(circle_2pi, 3).lam(2)
        res = symmetrize_positive_part(circle_2pi, eigenfunction(circle_2pi, lam))
        assert res.eta == 2
        assert abs(res.margin) <= 1e-8
        assert res.quotient_symmetrized == pytest.approx(1.0, rel=1e-8)
        assert res.mass_symmetrized == pytest.approx(res.mass_original, rel=1e-9)

    def test_pumpkin_is_strict(self):
        # the eigenvalue is double; every basis function shows a gap above solver noise
        mg = G.pumpkin(3)
        lam = eigenvalues(mg, 3).lam(2)
        for psi in eigenfunctions(mg, lam):
            res = symmetrize_positive_part(mg, psi)
            assert res.eta == 3
            assert res.margin > 1e-6
            assert res.star_mass_coarea == pytest.approx(res.star_mass_closed_form, rel=1e-9)
            assert res.mass_symmetrized == pytest.approx(res.mass_original, rel=1e-9)
            assert res.levels.ok

    def test_no_star_when_cutoff_is_zero(self):
        # on an unequal pumpkin the positive part never has three preimages
        mg = G.pumpkin([1.0, 1.3, 0.8])
        res = symmetrize_positive_part(mg, eigenfunction(mg, eigenvalues(mg, 3).lam(2)))
        assert res.cutoff == 0.0 and res.star_edge_length == 0.0
        assert res.margin == pytest.approx(0.0, abs=1e-9)

    def test_interval_rejected(self):
        mg = G.interval(1.0)
        with pytest.raises(BadParameter):
            symmetrize_positive_part(mg, eigenfunction(mg, PI2))

    def test_eta_above_connectivity(self, circle_2pi):
        with pytest.raises(BadParameter):
            symmetrize_positive_part(circle_2pi, eigenfunction(circle_2pi, 1.0), eta=3)

    def test_profile_is_monotone(self):
        mg = G.pumpkin(3)
        res = symmetrize_positive_part(mg, eigenfunctions(mg, eigenvalues(mg, 3).lam(2))[0])
        assert res.cutoff > 0.1
        # distance from the Dirichlet end grows with the level and reaches the centre at the cutoff
        assert np.all(np.diff(res.profile_positions) >= -1e-12)
        assert res.profile_positions[0] == 0.0
        assert res.profile_positions[-1] == pytest.approx(res.star_edge_length, rel=1e-9)
