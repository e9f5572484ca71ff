"""Centrality filtrations against independent brute-force oracles."""

from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extopo.errors import FiltrationError
from extopo.filtration import (
    CENTRALITY_NAMES,
    VertexFunction,
    betweenness_centrality,
    closeness_centrality,
    degree_centrality,
    edge_value_sublevel,
    edge_value_superlevel,
    make_bundle,
    subgraph_centrality,
)
from extopo.graphs import Graph, random_connected_graph, random_graph

TRIANGLE = Graph(3, np.array([[0, 1], [1, 2], [0, 2]]))
PATH3 = Graph(3, np.array([[0, 1], [1, 2]]))
STAR = Graph(5, np.array([[0, 1], [0, 2], [0, 3], [0, 4]]))


def adjacency_sets(g: Graph) -> list[set]:
    adj = [set() for _ in range(g.num_vertices)]
    for u, v in g.edges:
        adj[u].add(int(v))
        adj[v].add(int(u))
    return adj


def bfs_distances(adj, start) -> list:
    dist = [None] * len(adj)
    dist[start] = 0
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if dist[w] is None:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def brute_betweenness(g: Graph) -> np.ndarray:
    """Enumerate every simple path per pair; keep the shortest ones."""
    n = g.num_vertices
    adj = adjacency_sets(g)
    score = np.zeros(n)

    def all_paths(s, t):
        out, stack = [], [(s, [s])]
        while stack:
            v, path = stack.pop()
            if v == t:
                out.append(path)
                continue
            for w in sorted(adj[v]):
                if w not in path:
                    stack.append((w, path + [w]))
        return out

    for s in range(n):
        for t in range(s + 1, n):
            paths = all_paths(s, t)
            if not paths:
                continue
            shortest = min(len(p) for p in paths)
            geodesics = [p for p in paths if len(p) == shortest]
            for p in geodesics:
                for v in p[1:-1]:
                    score[v] += 1.0 / len(geodesics)
    if n >= 3:
        score /= (n - 1) * (n - 2) / 2.0
    else:
        score[:] = 0.0
    return score


def brute_closeness(g: Graph) -> np.ndarray:
    adj = adjacency_sets(g)
    out = np.zeros(g.num_vertices)
    for v in range(g.num_vertices):
        dist = bfs_distances(adj, v)
        reach = [d for d in dist if d is not None]
        total = sum(reach)
        out[v] = (len(reach) - 1) / total if total > 0 else 0.0
    return out


def expm_diagonal(g: Graph) -> np.ndarray:
    a = np.zeros((g.num_vertices, g.num_vertices))
    for u, v in g.edges:
        a[u, v] = a[v, u] = 1.0
    vals, vecs = np.linalg.eigh(a)
    return ((vecs * np.exp(vals)) @ vecs.T).diagonal().copy()


## ------------------------------------------------------------ hand values


class TestDegree:
    def test_triangle(self):
        assert degree_centrality(TRIANGLE).values.tolist() == [2.0, 2.0, 2.0]

    def test_path(self):
        assert degree_centrality(PATH3).values.tolist() == [1.0, 2.0, 1.0]

    def test_star(self):
        assert degree_centrality(STAR).values.tolist() == [4.0, 1.0, 1.0, 1.0, 1.0]


class TestBetweenness:
    def test_path_middle_is_one(self):
        assert betweenness_centrality(PATH3).values.tolist() == [0.0, 1.0, 0.0]

    def test_triangle_all_zero(self):
        assert betweenness_centrality(TRIANGLE).values.tolist() == [0.0, 0.0, 0.0]

    def test_matches_path_enumeration(self):
        for seed in range(60):
            g = random_graph(int(3 + seed % 6), 0.45, seed=seed)
            got = betweenness_centrality(g).values
            want = brute_betweenness(g)
            assert np.allclose(got, want, atol=1e-12), f"seed {seed}"

    def test_matches_on_connected(self):
        for seed in range(140):
            n = 4 + seed % 5
            g = random_connected_graph(n, min(2 * n, n * (n - 1) // 2), seed=seed)
            assert np.allclose(betweenness_centrality(g).values, brute_betweenness(g), atol=1e-12)


class TestCloseness:
    def test_path(self):
        assert np.allclose(closeness_centrality(PATH3).values, [2 / 3, 1.0, 2 / 3])

    def test_single_vertex(self):
        assert closeness_centrality(Graph(1, np.empty((0, 2)))).values.tolist() == [0.0]

    def test_disconnected_per_component(self):
        # two disjoint edges: every vertex reaches one other at distance 1
        g = Graph(4, np.array([[0, 1], [2, 3]]))
        assert closeness_centrality(g).values.tolist() == [1.0, 1.0, 1.0, 1.0]

    def test_matches_bfs(self):
        for seed in range(200):
            g = random_graph(int(2 + seed % 7), 0.4, seed=seed)
            assert np.allclose(closeness_centrality(g).values, brute_closeness(g), atol=1e-12)


class TestSubgraph:
    def test_single_vertex(self):
        assert subgraph_centrality(Graph(1, np.empty((0, 2)))).values.tolist() == [1.0]

    def test_single_edge_cosh(self):
        got = subgraph_centrality(Graph(2, np.array([[0, 1]]))).values
        assert np.allclose(got, np.cosh(1.0), atol=1e-9)

    def test_triangle_matches_eigendecomposition(self):
        assert np.allclose(subgraph_centrality(TRIANGLE).values, expm_diagonal(TRIANGLE), atol=1e-6)

    def test_random_matches_eigendecomposition(self):
        for seed in range(40):
            g = random_graph(10, 0.3, seed=seed)
            if g.degrees().max() > 6:
                continue
            assert np.allclose(subgraph_centrality(g).values, expm_diagonal(g), atol=1e-6)

    def test_truncation_stable(self):
        for seed in range(10):
            g = random_connected_graph(12, 20, seed=seed)
            assert g.degrees().max() <= 10
            k30 = subgraph_centrality(g, max_power=30).values
            k40 = subgraph_centrality(g, max_power=40).values
            assert np.max(np.abs(k30 - k40)) <= 1e-8

    def test_cap_rejected(self):
        g = random_connected_graph(12, 14, seed=0)
        with pytest.raises(FiltrationError) as exc:
            subgraph_centrality(g, cap=10)
        assert exc.value.kind == "too_large"


## ------------------------------------------------------------ edge values


class TestEdgeValues:
    def test_sublevel_max(self):
        f = VertexFunction("f", np.array([1.0, 3.0]))
        g = Graph(2, np.array([[0, 1]]))
        assert edge_value_sublevel(g, f, (0, 1)) == 3.0

    def test_constant_and_tie(self):
        f = VertexFunction("f", np.array([2.0, 2.0]))
        g = Graph(2, np.array([[0, 1]]))
        assert edge_value_sublevel(g, f, (0, 1)) == 2.0
        assert edge_value_superlevel(g, f, (0, 1)) == 2.0

    def test_bounds_against_endpoints(self):
        g = random_connected_graph(10, 16, seed=2)
        f = betweenness_centrality(g)
        for u, v in g.edges:
            lo = edge_value_superlevel(g, f, (u, v))
            hi = edge_value_sublevel(g, f, (u, v))
            assert lo <= f.values[u] <= hi
            assert lo <= f.values[v] <= hi


## ---------------------------------------------------------------- bundles


class TestMakeBundle:
    def test_order_preserved(self):
        g = random_connected_graph(8, 12, seed=0)
        bundle = make_bundle(g, ["betweenness", "closeness"])
        assert [f.name for f in bundle.functions] == ["betweenness", "closeness"]

    def test_single(self):
        g = random_connected_graph(5, 6, seed=1)
        assert len(make_bundle(g, ["degree"]).functions) == 1

    def test_unknown_name(self):
        g = random_connected_graph(5, 6, seed=1)
        with pytest.raises(FiltrationError) as exc:
            make_bundle(g, ["pagerank"])
        assert exc.value.kind == "unknown"

    def test_duplicate_name(self):
        g = random_connected_graph(5, 6, seed=1)
        with pytest.raises(FiltrationError) as exc:
            make_bundle(g, ["degree", "degree"])
        assert exc.value.kind == "duplicate"

    def test_all_names_registered(self):
        assert set(CENTRALITY_NAMES) == {"degree", "betweenness", "closeness", "subgraph"}

    def test_non_finite_values_rejected(self):
        with pytest.raises(FiltrationError):
            VertexFunction("bad", np.array([0.0, np.nan]))


## ------------------------------------------------------------- invariance


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), perm_seed=st.integers(0, 10_000))
def test_relabel_invariance(seed, perm_seed):
    g = random_connected_graph(9, 14, seed=seed % 500)
    perm = np.random.default_rng(perm_seed).permutation(9)
    relabeled = g.relabel(perm)
    for compute in (degree_centrality, betweenness_centrality, closeness_centrality, subgraph_centrality):
        direct = compute(relabeled).values
        routed = compute(g).values[np.argsort(perm)]
        assert np.allclose(direct, routed, atol=1e-10)
