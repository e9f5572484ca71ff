"""Graph model, dataset ingestion, augmentation, and noise injection."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extopo.errors import AugmentError, IngestError, NoiseError
from extopo.graphs import (
    AugmentationSpec,
    Graph,
    GraphDataset,
    augment,
    inject_feature_noise,
    parse_tudataset,
    random_connected_graph,
    random_graph,
    write_tudataset,
)


def make_dataset(n_graphs=10, seed=0, features=True) -> GraphDataset:
    rng = np.random.default_rng(seed)
    graphs = []
    for i in range(n_graphs):
        n = int(rng.integers(3, 12))
        g = random_connected_graph(n, min(2 * n, n * (n - 1) // 2), int(rng.integers(1 << 31)))
        x = rng.normal(size=(n, 3)) if features else None
        graphs.append(Graph(g.num_vertices, g.edges, x, i % 2))
    return GraphDataset("CHECK", tuple(graphs), 2)


## ------------------------------------------------------------ graph model


class TestGraph:
    def test_edges_normalized_sorted_upper(self):
        g = Graph(4, np.array([[2, 1], [0, 3], [1, 0]]))
        assert g.edges.tolist() == [[0, 1], [0, 3], [1, 2]]

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self-loop"):
            Graph(3, np.array([[1, 1]]))

    def test_duplicate_edge_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            Graph(3, np.array([[0, 1], [1, 0]]))

    def test_out_of_range_endpoint_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            Graph(2, np.array([[0, 2]]))

    def test_feature_row_count_must_match(self):
        with pytest.raises(ValueError, match="one row per vertex"):
            Graph(3, np.array([[0, 1]]), node_features=np.zeros((2, 4)))

    def test_degrees_and_csr_agree(self):
        g = random_connected_graph(12, 20, seed=3)
        indptr, indices = g.neighbor_csr()
        assert np.array_equal(np.diff(indptr), g.degrees())
        for v in range(g.num_vertices):
            nbrs = indices[indptr[v] : indptr[v + 1]]
            assert sorted(nbrs.tolist()) == nbrs.tolist()

    def test_relabel_round_trip(self):
        g = random_connected_graph(9, 14, seed=4)
        g = Graph(9, g.edges, np.arange(27.0).reshape(9, 3), 1)
        perm = np.random.default_rng(0).permutation(9)
        inv = np.empty(9, dtype=np.int64)
        inv[perm] = np.arange(9)
        assert g.relabel(perm).relabel(inv) == g


class TestGraphDataset:
    def test_label_out_of_range_rejected(self):
        g = Graph(2, np.array([[0, 1]]), graph_label=5)
        with pytest.raises(ValueError):
            GraphDataset("X", (g,), num_classes=2)

    def test_labels_vector(self):
        ds = make_dataset(6)
        assert ds.labels().tolist() == [0, 1, 0, 1, 0, 1]


## -------------------------------------------------------------- ingestion


def write_minimal(root, name="TINY"):
    d = root / name
    d.mkdir()
    (d / f"{name}_A.txt").write_text("1, 2\n2, 1\n")
    (d / f"{name}_graph_indicator.txt").write_text("1\n1\n")
    (d / f"{name}_graph_labels.txt").write_text("1\n")
    return d


class TestParseTudataset:
    def test_minimal_directory(self, tmp_path):
        write_minimal(tmp_path)
        ds = parse_tudataset(tmp_path, "TINY")
        assert len(ds.graphs) == 1
        assert ds.graphs[0].num_vertices == 2
        assert ds.graphs[0].num_edges == 1
        assert ds.num_classes == 1

    def test_graph_labels_remapped_contiguous(self, tmp_path):
        d = write_minimal(tmp_path)
        (d / "TINY_A.txt").write_text("1, 2\n2, 1\n3, 4\n4, 3\n")
        (d / "TINY_graph_indicator.txt").write_text("1\n1\n2\n2\n")
        (d / "TINY_graph_labels.txt").write_text("7\n-3\n")
        ds = parse_tudataset(tmp_path, "TINY")
        assert sorted(ds.labels().tolist()) == [0, 1]
        assert ds.num_classes == 2

    def test_node_labels_one_hot(self, tmp_path):
        d = write_minimal(tmp_path)
        (d / "TINY_node_labels.txt").write_text("0\n2\n")
        ds = parse_tudataset(tmp_path, "TINY")
        x = ds.graphs[0].node_features
        assert x.shape == (2, 2)
        assert x.tolist() == [[1.0, 0.0], [0.0, 1.0]]

    def test_constant_column_when_no_labels(self, tmp_path):
        write_minimal(tmp_path)
        ds = parse_tudataset(tmp_path, "TINY")
        assert ds.graphs[0].node_features.tolist() == [[1.0], [1.0]]

    def test_missing_mandatory_file(self, tmp_path):
        d = write_minimal(tmp_path)
        (d / "TINY_graph_labels.txt").unlink()
        with pytest.raises(IngestError) as exc:
            parse_tudataset(tmp_path, "TINY")
        assert exc.value.kind == "file"

    def test_cross_graph_edge(self, tmp_path):
        d = write_minimal(tmp_path)
        (d / "TINY_A.txt").write_text("1, 2\n2, 1\n1, 3\n")
        (d / "TINY_graph_indicator.txt").write_text("1\n1\n2\n")
        (d / "TINY_graph_labels.txt").write_text("1\n1\n")
        with pytest.raises(IngestError) as exc:
            parse_tudataset(tmp_path, "TINY")
        assert exc.value.kind == "cross_graph_edge"

    def test_non_integer_label(self, tmp_path):
        d = write_minimal(tmp_path)
        (d / "TINY_graph_labels.txt").write_text("banana\n")
        with pytest.raises(IngestError) as exc:
            parse_tudataset(tmp_path, "TINY")
        assert exc.value.kind == "parse"

    def test_round_trip(self, tmp_path):
        ds = make_dataset(8, seed=1)
        root = write_tudataset(ds, tmp_path)
        back = parse_tudataset(root.parent, ds.name)
        assert back.name == ds.name
        assert back.num_classes == ds.num_classes
        for a, b in zip(back.graphs, ds.graphs):
            assert a.num_vertices == b.num_vertices
            assert np.array_equal(a.edges, b.edges)
            assert a.graph_label == b.graph_label
            assert np.allclose(a.node_features, b.node_features, atol=5e-7)

    def test_round_trip_label_features_exact(self, tmp_path):
        # one-hot features survive the integer writer path bit-exactly
        d = write_minimal(tmp_path)
        (d / "TINY_node_labels.txt").write_text("1\n0\n")
        ds = parse_tudataset(tmp_path, "TINY")
        root = write_tudataset(ds, tmp_path / "again")
        back = parse_tudataset(root.parent, "TINY")
        assert back.graphs[0] == ds.graphs[0]


## ----------------------------------------------------------- augmentation


class TestAugment:
    def test_node_drop_count(self):
        g = random_connected_graph(20, 30, seed=0)
        out = augment(g, AugmentationSpec("node_drop", 0.1, 7))
        assert out.num_vertices == 18

    def test_ratio_zero_identity(self):
        g = random_connected_graph(9, 12, seed=1)
        assert augment(g, AugmentationSpec("node_drop", 0.0, 5)) == g
        assert augment(g, AugmentationSpec("edge_drop", 0.0, 5)) == g

    def test_deterministic(self):
        g = random_connected_graph(15, 25, seed=2)
        spec = AugmentationSpec("node_drop", 0.3, 11)
        assert augment(g, spec) == augment(g, spec)

    def test_original_unmodified(self):
        g = random_connected_graph(12, 18, seed=3)
        edges_before = g.edges.copy()
        augment(g, AugmentationSpec("node_drop", 0.5, 0))
        assert np.array_equal(g.edges, edges_before)

    def test_empty_graph_rejected(self):
        with pytest.raises(AugmentError) as exc:
            augment(Graph(0, np.empty((0, 2))), AugmentationSpec("node_drop", 0.1, 0))
        assert exc.value.kind == "empty"

    def test_ratio_bounds_validated(self):
        with pytest.raises(ValueError):
            AugmentationSpec("node_drop", 1.0, 0)
        with pytest.raises(ValueError):
            AugmentationSpec("node_drop", -0.1, 0)
        with pytest.raises(ValueError):
            AugmentationSpec("vertex_swap", 0.1, 0)

    @settings(max_examples=40, deadline=None)
    @given(
        n=st.integers(2, 24),
        ratio=st.floats(0.0, 0.99),
        seed=st.integers(0, 2**31 - 1),
        kind=st.sampled_from(["node_drop", "edge_drop"]),
    )
    def test_output_always_valid(self, n, ratio, seed, kind):
        g = random_graph(n, 0.4, seed=seed % 1000)
        out = augment(g, AugmentationSpec(kind, ratio, seed))
        # Graph.__post_init__ re-checks loops/dups/ranges; count laws here
        if kind == "node_drop":
            assert out.num_vertices == n - int(ratio * n)
        else:
            assert out.num_edges == g.num_edges - int(ratio * g.num_edges)
            assert out.num_vertices == n

    def test_features_follow_kept_vertices(self):
        g = random_connected_graph(10, 15, seed=4)
        x = np.arange(10.0)[:, None]
        g = Graph(10, g.edges, x, 0)
        out = augment(g, AugmentationSpec("node_drop", 0.3, 9))
        kept = sorted(out.node_features[:, 0].tolist())
        assert len(kept) == 7
        assert set(kept) <= set(range(10))


## -------------------------------------------------------- noise injection


class TestInjectFeatureNoise:
    def test_fraction_zero_unchanged(self):
        ds = make_dataset(10)
        out = inject_feature_noise(ds, 0.0, 1.0, 1.0, seed=0)
        assert all(a == b for a, b in zip(out.graphs, ds.graphs))

    def test_degenerate_gaussian_adds_mean(self):
        ds = make_dataset(5)
        out = inject_feature_noise(ds, 1.0, 1.0, 0.0, seed=0)
        for a, b in zip(out.graphs, ds.graphs):
            assert np.allclose(a.node_features, b.node_features + 1.0)

    def test_exact_count_changed(self):
        ds = make_dataset(100, seed=2)
        out = inject_feature_noise(ds, 0.2, 1.0, 1.0, seed=3)
        changed = sum(
            not np.array_equal(a.node_features, b.node_features)
            for a, b in zip(out.graphs, ds.graphs)
        )
        assert changed == 20

    def test_topology_and_labels_preserved(self):
        ds = make_dataset(20, seed=4)
        out = inject_feature_noise(ds, 0.5, 0.0, 2.0, seed=5)
        for a, b in zip(out.graphs, ds.graphs):
            assert np.array_equal(a.edges, b.edges)
            assert a.graph_label == b.graph_label

    def test_missing_features_rejected(self):
        ds = make_dataset(4, features=False)
        with pytest.raises(NoiseError) as exc:
            inject_feature_noise(ds, 0.2, 1.0, 1.0, seed=0)
        assert exc.value.kind == "no_features"

    def test_deterministic(self):
        ds = make_dataset(30, seed=6)
        a = inject_feature_noise(ds, 0.3, 1.0, 1.0, seed=7)
        b = inject_feature_noise(ds, 0.3, 1.0, 1.0, seed=7)
        assert all(x == y for x, y in zip(a.graphs, b.graphs))


## ---------------------------------------------------------- random graphs


class TestRandomGraphs:
    def test_connected_has_requested_shape(self):
        g = random_connected_graph(30, 45, seed=0)
        assert g.num_vertices == 30
        assert g.num_edges == 45

    def test_connected_is_connected(self):
        g = random_connected_graph(40, 50, seed=1)
        indptr, indices = g.neighbor_csr()
        seen = np.zeros(40, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            v = stack.pop()
            for w in indices[indptr[v] : indptr[v + 1]]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(int(w))
        assert seen.all()

    def test_deterministic(self):
        assert random_connected_graph(15, 20, seed=9) == random_connected_graph(15, 20, seed=9)

    def test_edge_count_bounds_validated(self):
        with pytest.raises(ValueError, match="at least"):
            random_connected_graph(5, 3, seed=0)
        # 3 vertices admit at most 3 edges; asking for 4 must fail, not spin
        with pytest.raises(ValueError, match="at most"):
            random_connected_graph(3, 4, seed=0)
