"""Tests for compression moduli, weak embeddings, distortion, and
ball-concentration diagnostics."""

import math

import numpy as np
import pytest

from coarselab.covers_walls import (
    homology_cover,
    wall_hilbert_embedding,
    wall_pseudometric,
    walls_from_cover,
)
from coarselab.errors import DisconnectedGraphError, InvalidInputError
from coarselab.expander_zoo import cayley_graph, cyclic_group
from coarselab.graph_core import build_graph, distance_matrix
from coarselab.metric_diag import (
    CosetConcentrationReport,
    MapEntry,
    MapFamily,
    ball_concentration,
    compression_moduli,
    coset_ball_replay,
    distortion,
    is_weak_embedding,
)
from coarselab.poincare_lab import GroupFunction, resolve_group
from coarselab.wreath import WreathGroup

# frozen output of the sampling oracle on the lamp group over Z/3; see
# test_poincare_lab for the derivation
DESK_CONSTANT_Z3 = 1.5205176042696106


def cycle(n):
    return cayley_graph(cyclic_group(n))


def k4():
    return build_graph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])


def hexagon():
    # unit circumradius, so adjacent corners sit at distance exactly 1
    return np.array(
        [[math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)] for k in range(6)]
    )


def wall_entry(base):
    """The double cover of ``base`` mapped into its wall coordinates."""
    cm = homology_cover(base)
    walls = walls_from_cover(cm)
    points = wall_hilbert_embedding(cm.cover, walls)
    return cm, walls, MapEntry(cm.cover, points, tuple(range(cm.cover.vertex_count)))


def identity_entry(g):
    return MapEntry(g, g, tuple(range(g.vertex_count)))


# -- map families -------------------------------------------------------------


class TestMapFamily:
    def test_entry_size(self):
        e = identity_entry(cycle(5))
        assert e.size == 5
        assert len(MapFamily((e,))) == 1

    def test_mapping_length_checked(self):
        with pytest.raises(InvalidInputError, match="map table has 2 entries"):
            MapEntry(cycle(3), cycle(3), (0, 1))

    def test_mapping_range_checked(self):
        with pytest.raises(InvalidInputError, match="outside the target"):
            MapEntry(cycle(3), cycle(3), (0, 1, 7))

    def test_empty_family_rejected(self):
        with pytest.raises(InvalidInputError, match="at least one entry"):
            MapFamily(())

    def test_matrix_source_validated(self):
        pts = np.zeros((2, 1))
        with pytest.raises(InvalidInputError, match="square"):
            MapEntry(np.zeros((2, 3)), pts, (0, 0))
        bad_sym = np.array([[0.0, 1.0], [2.0, 0.0]])
        with pytest.raises(InvalidInputError, match="symmetric"):
            compression_moduli(MapFamily((MapEntry(bad_sym, pts, (0, 1)),)))
        bad_diag = np.array([[1.0, 1.0], [1.0, 0.0]])
        with pytest.raises(InvalidInputError, match="symmetric"):
            compression_moduli(MapFamily((MapEntry(bad_diag, pts, (0, 1)),)))
        neg = np.array([[0.0, -1.0], [-1.0, 0.0]])
        with pytest.raises(InvalidInputError, match="nonnegative"):
            compression_moduli(MapFamily((MapEntry(neg, pts, (0, 1)),)))
        inf = np.array([[0.0, np.inf], [np.inf, 0.0]])
        with pytest.raises(InvalidInputError, match="finite"):
            compression_moduli(MapFamily((MapEntry(inf, pts, (0, 1)),)))

    def test_disconnected_source_rejected(self):
        g = build_graph(4, [(0, 1), (2, 3)])
        entry = MapEntry(g, np.zeros((1, 1)), (0, 0, 0, 0))
        with pytest.raises(DisconnectedGraphError):
            compression_moduli(MapFamily((entry,)))

    def test_point_target_must_be_2d(self):
        with pytest.raises(InvalidInputError, match=r"\(m, d\) array"):
            MapEntry(cycle(3), np.zeros(3), (0, 1, 2))


# -- compression moduli --------------------------------------------------------


class TestCompressionModuli:
    def test_identity_on_cycle(self):
        rep = compression_moduli(MapFamily((identity_entry(cycle(6)),)))
        assert rep.distances == (1.0, 2.0, 3.0)
        assert rep.rho == (1.0, 2.0, 3.0)
        assert rep.gamma == (1.0, 2.0, 3.0)
        assert rep.rho_envelope == rep.rho
        assert rep.gamma_envelope == rep.gamma
        assert rep.counts == (6, 6, 3)

    def test_constant_map_collapses(self):
        entry = MapEntry(cycle(5), np.zeros((1, 2)), (0,) * 5)
        rep = compression_moduli(MapFamily((entry,)))
        assert all(r == 0.0 for r in rep.rho)
        assert all(g == 0.0 for g in rep.gamma)

    def test_cycle_cover_wall_coordinates_are_exact(self):
        # the wall identity makes every class degenerate: rho = gamma
        # = sqrt(t) for all six distances of the 12-cycle
        _, _, entry = wall_entry(cycle(6))
        rep = compression_moduli(MapFamily((entry,)))
        assert rep.distances == tuple(float(t) for t in range(1, 7))
        for t, r, g in zip(rep.distances, rep.rho, rep.gamma):
            assert r == pytest.approx(math.sqrt(t), rel=1e-12)
            assert g == pytest.approx(math.sqrt(t), rel=1e-12)

    def test_k4_cover_wall_coordinates_split_at_diameter(self):
        # the distance-5 class of the K4 cover mixes wall distances 3
        # and 5, so the lower modulus dips and its envelope flattens
        cm, walls, entry = wall_entry(k4())
        rep = compression_moduli(MapFamily((entry,)))
        s2, s3, s5 = math.sqrt(2), math.sqrt(3), math.sqrt(5)
        assert rep.distances == (1.0, 2.0, 3.0, 4.0, 5.0)
        assert rep.rho == pytest.approx((1.0, s2, s3, 2.0, s3), rel=1e-12)
        assert rep.gamma == pytest.approx((1.0, s2, s3, 2.0, s5), rel=1e-12)
        assert rep.rho_envelope == pytest.approx((1.0, s2, s3, s3, s3), rel=1e-12)
        assert rep.gamma_envelope == rep.gamma
        assert rep.counts == (48, 96, 144, 144, 64)
        assert sum(rep.counts) == 32 * 31 // 2

    def test_moduli_match_wall_pseudometric(self):
        # independent recomputation of each class from the pseudometric
        cm, walls, entry = wall_entry(k4())
        rep = compression_moduli(MapFamily((entry,)))
        d_graph = distance_matrix(cm.cover)
        d_wall = wall_pseudometric(cm.cover, walls)
        n = cm.cover.vertex_count
        classes = {}
        for i in range(n):
            for j in range(i + 1, n):
                classes.setdefault(float(d_graph[i, j]), []).append(
                    math.sqrt(d_wall[i, j])
                )
        assert rep.distances == tuple(sorted(classes))
        for t, r, g in zip(rep.distances, rep.rho, rep.gamma):
            assert r == pytest.approx(min(classes[t]), abs=1e-12)
            assert g == pytest.approx(max(classes[t]), abs=1e-12)

    def test_family_pools_classes(self):
        fam = MapFamily((identity_entry(cycle(4)), identity_entry(cycle(6))))
        rep = compression_moduli(fam)
        assert rep.distances == (1.0, 2.0, 3.0)
        # 4 + 6 edges at distance one, 2 + 6 pairs at distance two
        assert rep.counts == (10, 8, 3)

    def test_envelopes_bound_and_stay_monotone(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(4, 9))
            pts = rng.normal(size=(n, 3))
            entry = MapEntry(cycle(n), pts, tuple(range(n)))
            rep = compression_moduli(MapFamily((entry,)))
            for r, g, re, ge in zip(
                rep.rho, rep.gamma, rep.rho_envelope, rep.gamma_envelope
            ):
                assert r <= g + 1e-12
                assert re <= r + 1e-12
                assert ge >= g - 1e-12
            assert all(
                a <= b + 1e-12
                for a, b in zip(rep.rho_envelope, rep.rho_envelope[1:])
            )
            assert all(
                a <= b + 1e-12
                for a, b in zip(rep.gamma_envelope, rep.gamma_envelope[1:])
            )

    def test_lipschitz_map_upper_modulus(self):
        # a cover projection contracts distances, so gamma(t) <= t
        cm = homology_cover(cycle(5))
        entry = MapEntry(cm.cover, cm.base, tuple(cm.vertex_map))
        rep = compression_moduli(MapFamily((entry,)))
        for t, g in zip(rep.distances, rep.gamma):
            assert g <= t + 1e-12

    def test_csv_shape_and_determinism(self):
        rep = compression_moduli(MapFamily((identity_entry(cycle(6)),)))
        text = rep.to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "t,rho,gamma,count"
        assert len(lines) == 1 + len(rep.distances)
        assert lines[1] == "1,1,1,6"
        assert text == compression_moduli(
            MapFamily((identity_entry(cycle(6)),))
        ).to_csv()


# -- weak embeddings ------------------------------------------------------------


class TestWeakEmbedding:
    def test_cover_projections_pass(self):
        """Projections of growing double covers are 1-Lipschitz with
        fiber fractions 1/3 > 1/4 > 1/5."""
        entries = []
        for n in (3, 4, 5):
            cm = homology_cover(cycle(n))
            entries.append(MapEntry(cm.cover, cm.base, tuple(cm.vertex_map)))
        rep = is_weak_embedding(MapFamily(tuple(entries)), 1.0)
        assert rep.lipschitz_constants == (1.0, 1.0, 1.0)
        assert rep.fiber_fractions == pytest.approx((1 / 3, 1 / 4, 1 / 5))
        assert rep.lipschitz_ok
        assert rep.fractions_decreasing
        assert rep.passed

    def test_constant_maps_fail(self):
        point = np.zeros((1, 2))
        entries = tuple(
            MapEntry(cycle(n), point, (0,) * n) for n in (3, 4, 5)
        )
        rep = is_weak_embedding(MapFamily(entries), 1.0)
        assert rep.lipschitz_ok
        assert rep.fiber_fractions == (1.0, 1.0, 1.0)
        assert not rep.fractions_decreasing
        assert not rep.passed

    def test_lipschitz_bound_enforced(self):
        entries = tuple(identity_entry(cycle(n)) for n in (4, 6))
        rep = is_weak_embedding(MapFamily(entries), 0.5)
        assert not rep.lipschitz_ok
        assert not rep.passed
        assert is_weak_embedding(MapFamily(entries), 1.0).passed

    def test_single_index_rejected(self):
        fam = MapFamily((identity_entry(cycle(4)),))
        with pytest.raises(InvalidInputError, match="at least two indices"):
            is_weak_embedding(fam, 1.0)

    def test_duplicate_coordinates_are_one_fiber(self):
        # two target rows holding the same point count as one image
        pts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
        entry = MapEntry(cycle(3), pts, (0, 1, 2))
        rep = is_weak_embedding(
            MapFamily((entry, identity_entry(cycle(4)))), 2.0
        )
        assert rep.fiber_fractions[0] == pytest.approx(2 / 3)


# -- distortion ------------------------------------------------------------------


class TestDistortion:
    def test_isometry(self):
        assert distortion(identity_entry(cycle(7))) == pytest.approx(1.0)

    def test_square_cycle_into_unit_square(self):
        corners = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        entry = MapEntry(cycle(4), corners, (0, 1, 2, 3))
        assert distortion(entry) == pytest.approx(math.sqrt(2), rel=1e-12)

    def test_cycle_cover_wall_embedding(self):
        _, _, entry = wall_entry(cycle(6))
        assert distortion(entry) == pytest.approx(math.sqrt(6), rel=1e-12)

    def test_k4_cover_wall_embedding(self):
        _, _, entry = wall_entry(k4())
        assert distortion(entry) == pytest.approx(5 / math.sqrt(3), rel=1e-12)

    def test_matches_moduli_extremes(self):
        _, _, entry = wall_entry(cycle(6))
        rep = compression_moduli(MapFamily((entry,)))
        expansion = max(g / t for t, g in zip(rep.distances, rep.gamma))
        contraction = max(t / r for t, r in zip(rep.distances, rep.rho))
        assert distortion(entry) == pytest.approx(expansion * contraction, rel=1e-12)

    def test_family_wrapper(self):
        fam = MapFamily((identity_entry(cycle(4)),))
        assert distortion(fam) == pytest.approx(1.0)
        two = MapFamily((identity_entry(cycle(4)), identity_entry(cycle(5))))
        with pytest.raises(InvalidInputError, match="single-index"):
            distortion(two)

    def test_non_injective_rejected(self):
        entry = MapEntry(cycle(3), cycle(3), (0, 0, 1))
        with pytest.raises(InvalidInputError, match="injective"):
            distortion(entry)

    def test_zero_source_distance_rejected(self):
        src = np.zeros((2, 2))
        pts = np.array([[0.0], [1.0]])
        with pytest.raises(InvalidInputError, match="not a metric"):
            distortion(MapEntry(src, pts, (0, 1)))

    def test_signed_zero_targets_rejected(self):
        # 0.0 and -0.0 are distinct rows but the same point
        src = np.array([[0.0, 1.0], [1.0, 0.0]])
        pts = np.array([[0.0], [-0.0]])
        with pytest.raises(InvalidInputError, match="zero target distance"):
            distortion(MapEntry(src, pts, (0, 1)))


# -- ball concentration -----------------------------------------------------------


class TestBallConcentration:
    def test_coincident_points(self):
        assert ball_concentration(np.zeros((9, 3)), 0.0) == 9

    def test_hexagon(self):
        pts = hexagon()
        assert ball_concentration(pts, 0.1) == 1
        assert ball_concentration(pts, 1.0) == 3
        assert ball_concentration(pts, 2.0) == 6

    def test_monotone_in_radius(self):
        rng = np.random.default_rng(11)
        pts = rng.normal(size=(40, 2))
        counts = [ball_concentration(pts, r) for r in np.linspace(0, 4, 17)]
        assert counts == sorted(counts)
        assert counts[0] >= 1
        assert counts[-1] == 40

    def test_validation(self):
        with pytest.raises(InvalidInputError, match=r"\(n, d\) array"):
            ball_concentration(np.zeros(4), 1.0)
        with pytest.raises(InvalidInputError, match="finite"):
            ball_concentration(np.array([[np.nan, 0.0]]), 1.0)
        with pytest.raises(InvalidInputError, match="nonnegative"):
            ball_concentration(np.zeros((2, 2)), -1.0)


# -- coset concentration replay ------------------------------------------------


def lamp_group(n):
    return WreathGroup(Q=cyclic_group(n), B=cyclic_group(n), proj=tuple(range(n)))


def lipschitz_function(W, rng, dim):
    """A random map scaled so every generator moves points at most 1."""
    table = resolve_group(W)
    raw = rng.normal(size=(table.order, dim))
    worst = max(
        float(np.linalg.norm(raw[table.mul(x, s)] - raw[x]))
        for x in range(table.order)
        for s in table.generators
    )
    return GroupFunction(W, raw / worst)


class TestCosetBallReplay:
    def test_averaging_radius_captures_half(self):
        """At radius sqrt(2 C |Sigma|) some coset keeps at least half
        its points together, for every sampled 1-Lipschitz map."""
        W = lamp_group(3)
        radius = math.sqrt(2 * DESK_CONSTANT_Z3 * 3)
        rng = np.random.default_rng(20250814)
        for _ in range(25):
            f = lipschitz_function(W, rng, 3)
            rep = coset_ball_replay(W, None, f, radius)
            assert rep.coset_size == 3
            assert rep.radius == radius
            assert 2 * rep.captured >= rep.coset_size
            assert rep.passed

    def test_constant_map_captures_everything(self):
        W = lamp_group(2)
        f = GroupFunction(W, np.zeros((8, 2)))
        rep = coset_ball_replay(W, None, f, 0.0)
        assert rep.captured == rep.coset_size == 2
        assert rep.passed

    def test_table_group_with_explicit_subset(self):
        G = cyclic_group(6)
        angles = 2 * math.pi * np.arange(6) / 6
        f = GroupFunction(G, np.stack([np.cos(angles), np.sin(angles)], axis=1))
        rep = coset_ball_replay(G, [0, 2, 4], f, 1.0)
        # literal replay of the scan; the off-center corners sit at
        # distance sqrt(3) > 1, so only the center is captured
        best = -1
        vals = f.values
        for x in range(6):
            hits = sum(
                1
                for y in (0, 2, 4)
                if float(np.linalg.norm(vals[G.mul(x, y)] - vals[x])) <= 1.0 + 1e-12
            )
            best = max(best, hits)
        assert rep.captured == best == 1
        assert rep.coset_size == 3
        assert not rep.passed

    def test_table_group_requires_subset(self):
        G = cyclic_group(4)
        f = GroupFunction(G, np.zeros((4, 1)))
        with pytest.raises(InvalidInputError, match="explicit X subset"):
            coset_ball_replay(G, None, f, 1.0)

    def test_function_shape_checked(self):
        W = lamp_group(2)
        f = GroupFunction(cyclic_group(3), np.zeros((3, 1)))
        with pytest.raises(InvalidInputError, match="do not match"):
            coset_ball_replay(W, None, f, 1.0)

    def test_negative_radius_rejected(self):
        W = lamp_group(2)
        f = GroupFunction(W, np.zeros((8, 1)))
        with pytest.raises(InvalidInputError, match="nonnegative"):
            coset_ball_replay(W, None, f, -0.5)

    def test_report_threshold(self):
        assert CosetConcentrationReport(0, 2, 4, 1.0).passed
        assert not CosetConcentrationReport(0, 1, 4, 1.0).passed
