import math
import random
from fractions import Fraction

import numpy as np
import pytest

from coarselab.errors import (
    CapExceededError,
    DisconnectedGraphError,
    InvalidInputError,
)
from coarselab.graph_core import (
    GraphFamily,
    LabeledGraph,
    adjacency_spectrum,
    bfs_distances,
    boundary_size,
    build_graph,
    cheeger_bounds,
    cheeger_exact,
    dg_ratio,
    diameter,
    distance_matrix,
    expander_certify,
    girth,
    inverse_label,
    laplacian_lambda2,
    spectral_report,
    split_components,
)

from oracles import naive_cheeger, naive_girth, random_connected_graph, random_graph


def cycle(n: int) -> LabeledGraph:
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> LabeledGraph:
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path(n: int) -> LabeledGraph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def petersen() -> LabeledGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, 5 + i) for i in range(5)]
    return build_graph(10, outer + inner + spokes)


class TestBuildGraph:
    def test_labeled_triangle_has_six_darts(self):
        g = build_graph(3, [(0, 1, "a"), (1, 2, "b"), (2, 0, "c")])
        assert g.dart_count == 6
        assert g.edge_count == 3
        assert g.alphabet == {"a", "b", "c"}

    def test_single_vertex_no_edges(self):
        g = build_graph(1, [])
        assert girth(g) is math.inf
        assert g.is_connected

    def test_parallel_edges_accepted(self):
        g = build_graph(2, [(0, 1, "a"), (0, 1, "a")])
        assert g.edge_count == 2
        assert girth(g) == 2

    def test_dart_involution(self):
        g = build_graph(3, [(0, 1, "a"), (1, 2, "b^-1")])
        for d in range(g.dart_count):
            r = g.dart_reverse(d)
            assert r != d
            assert g.dart_reverse(r) == d
            assert g.dart_source(d) == g.dart_target(r)
            assert g.dart_label(r) == inverse_label(g.dart_label(d))

    def test_double_inverse_is_identity(self):
        for lab in ("a", "a^-1", "x7", None):
            assert inverse_label(inverse_label(lab)) == lab

    def test_out_of_range_vertex_rejected(self):
        with pytest.raises(InvalidInputError):
            build_graph(2, [(0, 2)])

    def test_label_outside_alphabet_rejected(self):
        with pytest.raises(InvalidInputError):
            build_graph(2, [(0, 1, "c")], alphabet=["a", "b"])

    def test_inverse_marker_forbidden_in_alphabet(self):
        with pytest.raises(InvalidInputError):
            build_graph(2, [(0, 1)], alphabet=["a^-1"])

    def test_inverse_labels_use_declared_base(self):
        g = build_graph(2, [(0, 1, "a^-1")], alphabet=["a"])
        assert g.dart_label(0) == "a^-1"
        assert g.dart_label(1) == "a"

    def test_loop_degree_counts_twice(self):
        g = build_graph(1, [(0, 0)])
        assert g.degree(0) == 2
        assert girth(g) == 1


class TestDistances:
    def test_bfs_symmetry_and_triangle_inequality_exhaustive(self):
        rng = random.Random(7)
        for _ in range(40):
            n = rng.randrange(2, 13)
            g = random_connected_graph(rng, n, rng.randrange(0, 8))
            dist = [bfs_distances(g, s) for s in range(n)]
            for a in range(n):
                for b in range(n):
                    assert dist[a][b] == dist[b][a]
                    for c in range(n):
                        assert dist[a][c] <= dist[a][b] + dist[b][c]

    def test_distance_matrix_matches_bfs(self):
        rng = random.Random(11)
        for _ in range(25):
            n = rng.randrange(2, 12)
            g = random_graph(rng, n, rng.randrange(1, 14))
            mat = distance_matrix(g)
            for s in range(n):
                row = bfs_distances(g, s)
                for t in range(n):
                    expect = math.inf if row[t] < 0 else row[t]
                    assert mat[s][t] == expect

    def test_diameter_examples(self):
        assert diameter(cycle(6)) == 3
        assert diameter(complete(4)) == 1
        assert diameter(path(5)) == 4

    def test_diameter_rejects_disconnected(self):
        g = build_graph(4, [(0, 1), (2, 3)])
        with pytest.raises(DisconnectedGraphError):
            diameter(g)


class TestGirth:
    def test_known_values(self):
        assert girth(complete(4)) == 3
        assert girth(cycle(6)) == 6
        assert girth(path(5)) is math.inf
        assert girth(petersen()) == 5

    def test_agrees_with_edge_deletion_oracle(self):
        rng = random.Random(23)
        for _ in range(120):
            n = rng.randrange(1, 11)
            g = random_graph(rng, n, rng.randrange(0, 16))
            assert girth(g) == naive_girth(g)


class TestCheeger:
    def test_examples(self):
        r4 = cheeger_exact(cycle(4))
        assert r4.value == 1
        assert r4.witness == (0, 1)
        assert cheeger_exact(complete(2)).value == 1
        rk4 = cheeger_exact(complete(4))
        assert rk4.value == 2
        assert len(rk4.witness) == 2

    def test_witness_attains_value(self):
        rng = random.Random(5)
        for _ in range(30):
            n = rng.randrange(2, 10)
            g = random_connected_graph(rng, n, rng.randrange(0, 10))
            res = cheeger_exact(g)
            assert 1 <= len(res.witness) <= n // 2
            assert Fraction(boundary_size(g, res.witness), len(res.witness)) == res.value

    def test_agrees_with_bruteforce_on_200_random_graphs(self):
        rng = random.Random(99)
        for _ in range(200):
            n = rng.randrange(2, 11)
            g = random_connected_graph(rng, n, rng.randrange(0, 12))
            value, witness = naive_cheeger(g)
            res = cheeger_exact(g)
            assert res.value == value
            assert res.witness == witness

    def test_cap_enforced(self):
        with pytest.raises(CapExceededError):
            cheeger_exact(cycle(21))
        assert cheeger_exact(cycle(21), cap=21).value == Fraction(2, 10)

    def test_disconnected_rejected(self):
        with pytest.raises(DisconnectedGraphError):
            cheeger_exact(build_graph(4, [(0, 1), (2, 3)]))


class TestSpectra:
    def test_c4_spectrum(self):
        vals = adjacency_spectrum(cycle(4)).eigenvalues
        assert np.allclose(vals, [2.0, 0.0, 0.0, -2.0], atol=1e-9)

    def test_k4_spectrum(self):
        vals = adjacency_spectrum(complete(4)).eigenvalues
        assert np.allclose(vals, [3.0, -1.0, -1.0, -1.0], atol=1e-9)

    def test_cycle_spectrum_matches_circulant_formula(self):
        for n in (3, 5, 8, 12):
            vals = adjacency_spectrum(cycle(n)).eigenvalues
            expect = sorted((2 * math.cos(2 * math.pi * k / n) for k in range(n)), reverse=True)
            assert np.allclose(vals, expect, atol=1e-9)

    def test_petersen_spectrum(self):
        vals = adjacency_spectrum(petersen()).eigenvalues
        expect = [3.0] + [1.0] * 5 + [-2.0] * 4
        assert np.allclose(vals, expect, atol=1e-9)

    def test_multi_edge_multiplicity(self):
        g = build_graph(2, [(0, 1), (0, 1)])
        vals = adjacency_spectrum(g).eigenvalues
        assert np.allclose(vals, [2.0, -2.0], atol=1e-9)

    def test_iterative_route_matches_dense_on_small_cap(self):
        g = cycle(30)
        full = adjacency_spectrum(g).eigenvalues
        part = adjacency_spectrum(g, dense_cap=10, extremes=3, seed=1)
        assert not part.complete
        assert part.eigenvalues[0] == pytest.approx(full[0], abs=1e-8)
        assert part.eigenvalues[-1] == pytest.approx(full[-1], abs=1e-8)

    def test_spectral_sandwich(self):
        rng = random.Random(31)
        for _ in range(40):
            n = rng.randrange(2, 11)
            g = random_connected_graph(rng, n, rng.randrange(0, 10))
            lower, upper = cheeger_bounds(g)
            h = float(cheeger_exact(g).value)
            assert lower - 1e-9 <= h <= upper + 1e-9

    def test_lambda2_positive_iff_connected(self):
        assert laplacian_lambda2(cycle(5)) > 1e-9
        with pytest.raises(DisconnectedGraphError):
            laplacian_lambda2(build_graph(3, [(0, 1)]))


class TestFamilies:
    def test_split_components(self):
        g = build_graph(5, [(0, 1), (3, 4), (1, 2)])
        fam = split_components(g)
        assert fam.sizes() == (3, 2)
        assert fam.origin_vertices == ((0, 1, 2), (3, 4))

    def test_family_rejects_disconnected_component(self):
        with pytest.raises(InvalidInputError):
            GraphFamily((build_graph(4, [(0, 1), (2, 3)]),))

    def test_dg_ratio_examples(self):
        assert dg_ratio(GraphFamily((cycle(6),))).ratios == (0.5,)
        rep = dg_ratio(GraphFamily((complete(4), cycle(6))))
        assert rep.ratios == pytest.approx((1 / 3, 0.5))
        assert rep.maximum == 0.5

    def test_dg_ratio_rejects_acyclic(self):
        with pytest.raises(InvalidInputError):
            dg_ratio(GraphFamily((path(4),)))

    def test_metadata_matches_direct_invariants(self):
        fam = GraphFamily((cycle(6), complete(4)))
        meta = fam.metadata()
        assert meta[0]["girth"] == 6 and meta[0]["diameter"] == 3
        assert meta[1]["girth"] == 3 and meta[1]["diameter"] == 1


class TestExpanderCertify:
    def test_growing_cycles_fail_cheeger(self):
        fam = GraphFamily((cycle(4), cycle(8), cycle(16)))
        rep = expander_certify(fam, 0.3)
        assert not rep.passed
        assert any("component 2" in f for f in rep.failures)
        # h(C16) = 2/8
        assert rep.checks[2].cheeger_value == pytest.approx(0.25)

    def test_single_k4_passes(self):
        rep = expander_certify(GraphFamily((complete(4),)), 1.0)
        assert rep.passed
        assert rep.degree_bound == 3

    def test_repeated_size_fails(self):
        rep = expander_certify(GraphFamily((cycle(6), cycle(6))), 0.01)
        assert not rep.passed
        assert any("strictly increase" in f for f in rep.failures)

    def test_spectral_fallback_above_cap(self):
        fam = GraphFamily((complete(4), complete(30)))
        rep = expander_certify(fam, 0.5, cheeger_cap=20)
        assert rep.passed
        assert rep.checks[0].exact and not rep.checks[1].exact
        with pytest.raises(CapExceededError):
            expander_certify(fam, 0.5, cheeger_cap=20, allow_spectral=False)


class TestSpectralReport:
    def test_report_fields(self):
        rep = spectral_report(cycle(4))
        assert rep.cheeger_value == 1
        assert rep.witness_subset == (0, 1)
        assert rep.degree_bounds == (2, 2)
        assert rep.dg_ratio == 0.5
        assert rep.eigenvalues == pytest.approx((2.0, 0.0, 0.0, -2.0), abs=1e-9)

    def test_tree_report_has_no_ratio(self):
        rep = spectral_report(path(3))
        assert rep.dg_ratio is None
        assert rep.girth is math.inf
