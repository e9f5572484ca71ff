"""Landscapes, images, feature tables, and their serialization."""

import numpy as np
import pytest

import extopo.vectorization as vec
from extopo.errors import VectorizeError
from extopo.filtration import VertexFunction, make_bundle
from extopo.graphs import Graph, random_connected_graph
from extopo.persistence import EPDPoint, ExtendedPersistenceDiagram, epd_bundle, epd_fast
from extopo.vectorization import (
    FeatureVector,
    LandscapeSet,
    default_sigma,
    featurize,
    featurize_diagrams,
    fit_feature_config,
    landscape,
    landscape_grid,
    load_landscape,
    persistence_image,
    read_feature_csv,
    save_landscape,
    tent_value,
    write_feature_csv,
)


def diagram(*points) -> ExtendedPersistenceDiagram:
    return ExtendedPersistenceDiagram("f", tuple(EPDPoint(b, d, k) for k, b, d in points))


def tent(b, d, t):
    kind = "Ord0" if b <= d else "Ext1"
    return tent_value(EPDPoint(b, d, kind), t)


def brute_level(points, t, k):
    """k-th largest tent value at t over (birth, death) pairs, zero padded."""
    tents = sorted((tent(b, d, t) for b, d in points), reverse=True)
    tents += [0.0] * k
    return tents[k - 1]


## ------------------------------------------------------------------ tents


class TestTentValue:
    def test_peak_and_feet(self):
        assert tent(0.0, 2.0, 1.0) == 1.0
        assert tent(0.0, 2.0, 0.0) == 0.0
        assert tent(0.0, 2.0, 2.0) == 0.0
        assert tent(0.0, 2.0, -1.0) == 0.0

    def test_reversed_interval_negates(self):
        assert tent(2.0, 0.0, 1.0) == -1.0

    def test_array_argument(self):
        got = tent(0.0, 2.0, np.array([0.0, 0.5, 1.0, 1.5, 3.0]))
        assert np.allclose(got, [0.0, 0.5, 1.0, 0.5, 0.0])


class TestLandscapeGrid:
    def test_uniform_spans_coordinates(self):
        epd = diagram(("Ord0", 0.0, 2.0), ("Ord0", 1.0, 3.0))
        grid = landscape_grid([epd], "uniform", 11)
        assert grid[0] == 0.0 and grid[-1] == 3.0 and grid.size == 11

    def test_critical_contains_coords_and_midpoints(self):
        epd = diagram(("Ord0", 0.0, 2.0))
        grid = landscape_grid([epd], "critical", 0)
        assert grid.tolist() == [0.0, 1.0, 2.0]

    def test_explicit_array_passthrough(self):
        grid = landscape_grid([diagram()], np.array([0.0, 1.0, 4.0]), 0)
        assert grid.tolist() == [0.0, 1.0, 4.0]

    def test_explicit_must_increase(self):
        with pytest.raises(VectorizeError) as exc:
            landscape_grid([diagram()], np.array([0.0, 0.0, 1.0]), 0)
        assert exc.value.kind == "grid"

    def test_unknown_spec(self):
        with pytest.raises(VectorizeError):
            landscape_grid([diagram()], "chebyshev", 5)


## ------------------------------------------------------------- landscapes


class TestLandscape:
    def test_single_point_levels(self):
        epd = diagram(("Ord0", 0.0, 2.0))
        ls = landscape(epd, k_max=2, grid=np.array([0.0, 0.5, 1.0, 1.5, 2.0]))
        assert np.allclose(ls.pos_levels[0], [0.0, 0.5, 1.0, 0.5, 0.0])
        assert np.allclose(ls.pos_levels[1], 0.0)
        assert np.allclose(ls.neg_levels, 0.0)

    def test_two_overlapping_points(self):
        epd = diagram(("Ord0", 0.0, 2.0), ("Ord0", 1.0, 3.0))
        ls = landscape(epd, k_max=2, grid=np.array([1.0, 1.5, 2.0]))
        assert np.allclose(ls.pos_levels[0], [1.0, 0.5, 1.0])
        assert np.allclose(ls.pos_levels[1], [0.0, 0.5, 0.0])

    def test_negative_side_mirror(self):
        epd = diagram(("Ext1", 2.0, 0.0))
        ls = landscape(epd, k_max=1, grid=np.array([0.0, 1.0, 2.0]))
        assert np.allclose(ls.neg_levels[0], [0.0, -1.0, 0.0])
        assert np.allclose(ls.pos_levels[0], 0.0)

    def test_empty_diagram_all_zero(self):
        ls = landscape(diagram(), k_max=3)
        assert np.allclose(ls.pos_levels, 0.0) and np.allclose(ls.neg_levels, 0.0)
        assert ls.t_grid.size == 50

    def test_zero_persistence_points_contribute_nothing(self):
        with_zero = diagram(("Ord0", 0.0, 2.0), ("Ord0", 1.0, 1.0))
        without = diagram(("Ord0", 0.0, 2.0))
        grid = np.linspace(0.0, 2.0, 9)
        a = landscape(with_zero, k_max=2, grid=grid)
        b = landscape(without, k_max=2, grid=grid)
        assert np.array_equal(a.pos_levels, b.pos_levels)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for trial in range(30):
            n_pts = int(rng.integers(1, 8))
            pos = [(b, b + rng.uniform(0.1, 2.0)) for b in rng.uniform(0, 3, n_pts)]
            neg = [(d + rng.uniform(0.1, 2.0), d) for d in rng.uniform(0, 3, n_pts)]
            points = [("Ord0", b, d) for b, d in pos] + [("Ext1", b, d) for b, d in neg]
            epd = diagram(*points)
            grid = np.sort(rng.uniform(-1, 5, 17))
            ls = landscape(epd, k_max=4, grid=grid)
            for k in range(1, 5):
                want_pos = [brute_level(pos, t, k) for t in grid]
                mirror = [(d, b) for b, d in neg]
                want_neg = [-brute_level(mirror, t, k) for t in grid]
                assert np.allclose(ls.pos_levels[k - 1], want_pos, atol=1e-12)
                assert np.allclose(ls.neg_levels[k - 1], want_neg, atol=1e-12)

    def test_level_monotonicity(self):
        epd = diagram(*[("Ord0", b, b + w) for b, w in np.random.default_rng(1).uniform(0.1, 2, (12, 2))])
        ls = landscape(epd, k_max=5)
        for k in range(4):
            assert np.all(ls.pos_levels[k] >= ls.pos_levels[k + 1] - 1e-15)

    def test_backend_dispatch_identical(self, monkeypatch):
        epd = diagram(("Ord0", 0.0, 2.0), ("Ord0", 1.0, 3.0), ("Ext1", 4.0, 1.0))
        with_numba = landscape(epd, k_max=3)
        monkeypatch.setattr(vec, "USING_NUMBA", False)
        pure = landscape(epd, k_max=3)
        assert np.array_equal(with_numba.pos_levels, pure.pos_levels)
        assert np.array_equal(with_numba.neg_levels, pure.neg_levels)

    def test_shape_validation(self):
        with pytest.raises(VectorizeError):
            LandscapeSet(2, np.array([0.0, 1.0]), np.zeros((2, 3)), np.zeros((2, 2)))


## ----------------------------------------------------------------- images


class TestPersistenceImage:
    def test_total_mass(self):
        epd = diagram(("Ord0", 0.0, 2.0), ("Ord0", 1.0, 3.0), ("Ext0", 0.0, 3.0))
        img = persistence_image(epd, resolution=(40, 40), sigma=0.1, padding=5.0)
        weights = sum(abs(d - b) for p in epd.points for b, d in [(p.birth, p.death)] if b != d)
        assert abs(img.pixels.sum() - weights) <= 1e-6 * weights

    def test_weight_linearity(self):
        a = diagram(("Ord0", 0.0, 1.0))
        b = diagram(("Ord0", 0.0, 2.0))
        bounds = (-1.0, 3.0, -1.0, 3.0)
        img_a = persistence_image(a, resolution=(20, 20), sigma=0.2, bounds=bounds)
        img_b = persistence_image(b, resolution=(20, 20), sigma=0.2, bounds=bounds)
        # persistence weight doubles while each axis profile shifts; compare mass
        assert abs(img_b.pixels.sum() - 2 * img_a.pixels.sum()) <= 1e-6

    def test_translation_equivariance(self):
        base = diagram(("Ord0", 0.0, 1.0), ("Ord0", 0.5, 2.0))
        moved = diagram(("Ord0", 3.0, 4.0), ("Ord0", 3.5, 5.0))
        img_a = persistence_image(base, resolution=(25, 25), sigma=0.15, bounds=(-1.0, 3.0, -1.0, 3.0))
        img_b = persistence_image(moved, resolution=(25, 25), sigma=0.15, bounds=(2.0, 6.0, 2.0, 6.0))
        assert np.allclose(img_a.pixels, img_b.pixels, atol=1e-12)

    def test_constant_weight_counts_points(self):
        epd = diagram(("Ord0", 0.0, 1.0), ("Ext1", 2.0, 0.5))
        img = persistence_image(epd, resolution=(30, 30), sigma=0.1, weight="constant", padding=6.0)
        assert abs(img.pixels.sum() - 2.0) <= 1e-6

    def test_empty_diagram_zero_image(self):
        img = persistence_image(diagram(), resolution=(10, 10), sigma=0.1)
        assert img.pixels.shape == (10, 10)
        assert np.all(img.pixels == 0.0)

    def test_sigma_validation(self):
        with pytest.raises(VectorizeError) as exc:
            persistence_image(diagram(("Ord0", 0.0, 1.0)), sigma=0.0)
        assert exc.value.kind == "sigma"

    def test_default_sigma_scales_with_spread(self):
        small = diagram(("Ord0", 0.0, 1.0), ("Ord0", 0.25, 0.5))
        large = diagram(("Ord0", 0.0, 10.0), ("Ord0", 2.5, 5.0))
        assert abs(default_sigma(large) - 10 * default_sigma(small)) <= 1e-12

    def test_unknown_weight_rejected(self):
        with pytest.raises(ValueError):
            persistence_image(diagram(("Ord0", 0.0, 1.0)), weight="entropy")


## --------------------------------------------------------- feature tables


def small_dataset(n=6):
    rng = np.random.default_rng(3)
    graphs, rows = [], []
    for i in range(n):
        sz = int(rng.integers(5, 10))
        g = random_connected_graph(sz, min(2 * sz, sz * (sz - 1) // 2), seed=i)
        graphs.append(g)
        rows.append(epd_bundle(g, make_bundle(g, ["degree", "betweenness"])))
    return graphs, rows


class TestFeaturize:
    def test_epl_length_two_functions(self):
        graphs, rows = small_dataset()
        config = fit_feature_config(rows, ["degree", "betweenness"], "EPL", k_max=2, n_samples=50)
        vecs = [featurize_diagrams(row, config) for row in rows]
        assert all(v.values.shape == (400,) for v in vecs)
        assert config.length() == 400

    def test_epi_length(self):
        graphs, rows = small_dataset()
        one_fn_rows = [(row[0],) for row in rows]
        config = fit_feature_config(one_fn_rows, ["degree"], "EPI", resolution=(50, 50))
        vecs = [featurize_diagrams(row, config) for row in one_fn_rows]
        assert all(v.values.shape == (2500,) for v in vecs)

    def test_shared_grid_across_dataset(self):
        graphs, rows = small_dataset()
        config = fit_feature_config(rows, ["degree", "betweenness"], "EPL")
        grids = [plan.t_grid for plan in config.plans]
        assert len(grids) == 2
        vecs = [featurize_diagrams(row, config) for row in rows]
        assert len({v.values.shape for v in vecs}) == 1

    def test_featurize_graph_entry_point(self):
        g = random_connected_graph(8, 12, seed=9)
        _, rows = small_dataset()
        config = fit_feature_config(rows, ["degree", "betweenness"], "EPL")
        v = featurize(g, config)
        assert v.values.shape == (400,)

    def test_column_names_stable(self):
        _, rows = small_dataset()
        one_fn_rows = [(row[0],) for row in rows]
        config = fit_feature_config(one_fn_rows, ["degree"], "EPL", k_max=1, n_samples=3)
        v = featurize_diagrams(one_fn_rows[0], config)
        names = v.column_names()
        assert len(names) == v.values.size
        assert names[0].startswith("degree:EPL:")

    def test_relabel_invariance(self):
        g = random_connected_graph(9, 14, seed=11)
        perm = np.random.default_rng(0).permutation(9)
        _, rows = small_dataset()
        config = fit_feature_config(rows, ["degree", "betweenness"], "EPL")
        assert np.allclose(featurize(g, config).values, featurize(g.relabel(perm), config).values, atol=1e-12)

    def test_layout_mismatch_rejected(self):
        _, rows = small_dataset()
        config = fit_feature_config(rows, ["degree", "betweenness"], "EPL")
        with pytest.raises(ValueError, match="one diagram per configured function"):
            featurize_diagrams((rows[0][0],), config)


class TestCsvRoundTrip:
    def test_round_trip(self, tmp_path):
        _, rows = small_dataset()
        config = fit_feature_config(rows, ["degree", "betweenness"], "EPL")
        vecs = [featurize_diagrams(row, config) for row in rows]
        labels = [i % 2 for i in range(len(vecs))]
        path = tmp_path / "features.csv"
        write_feature_csv(path, vecs, labels)
        names, X, y = read_feature_csv(path)
        assert names == vecs[0].column_names()
        assert np.array_equal(X, np.vstack([v.values for v in vecs]))
        assert y.tolist() == labels

    def test_byte_identical_rewrite(self, tmp_path):
        _, rows = small_dataset()
        one_fn = [(row[0],) for row in rows]
        config = fit_feature_config(one_fn, ["degree"], "EPL")
        vecs = [featurize_diagrams(row, config) for row in one_fn]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_feature_csv(a, vecs, [0] * len(vecs))
        write_feature_csv(b, vecs, [0] * len(vecs))
        assert a.read_bytes() == b.read_bytes()

    def test_label_count_mismatch(self, tmp_path):
        with pytest.raises(ValueError):
            write_feature_csv(tmp_path / "x.csv", [], [1])


class TestLandscapeFile:
    def test_round_trip_exact(self, tmp_path):
        epd = diagram(("Ord0", 0.0, 2.0), ("Ext1", 3.0, 1.0))
        ls = landscape(epd, k_max=2, n_samples=17)
        path = tmp_path / "ls.txt"
        save_landscape(ls, path)
        back = load_landscape(path)
        assert back == ls

    def test_parse_error_kind(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("not a landscape\n")
        with pytest.raises(VectorizeError) as exc:
            load_landscape(path)
        assert exc.value.kind == "grid"


class TestFeatureVector:
    def test_length_checked_against_layout(self):
        with pytest.raises(ValueError, match="layout covers"):
            FeatureVector(np.zeros(5), (("degree", "EPL", (2, 2, 2)),))
