"""Graph containers, TUDataset-format ingestion, and augmentation.

All randomness in this module (and in the rest of the package) flows
through ``numpy.random.default_rng`` (PCG64) seeded with explicit integer
seeds, so every operation is reproducible across runs and platforms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AugmentError, IngestError, NoiseError

__all__ = [
    "Graph",
    "GraphDataset",
    "AugmentationSpec",
    "parse_tudataset",
    "write_tudataset",
    "augment",
    "inject_feature_noise",
    "random_graph",
    "random_connected_graph",
]


def _frozen_array(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with 0-based contiguous vertex ids.

    ``edges`` is an ``(m, 2)`` int64 array with ``u < v`` per row, sorted
    lexicographically, without duplicates or self-loops.  ``node_features``
    is an optional ``(num_vertices, f)`` float64 matrix.
    """

    num_vertices: int
    edges: np.ndarray
    node_features: np.ndarray | None = None
    graph_label: int | None = None

    def __post_init__(self):
        n = int(self.num_vertices)
        if n < 0:
            raise ValueError("num_vertices must be >= 0")
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            e = np.sort(e, axis=1)
            order = np.lexsort((e[:, 1], e[:, 0]))
            e = e[order]
            if np.any((e[1:] == e[:-1]).all(axis=1)):
                raise ValueError("duplicate edges are not allowed")
        object.__setattr__(self, "num_vertices", n)
        object.__setattr__(self, "edges", _frozen_array(e))
        if self.node_features is not None:
            x = np.asarray(self.node_features, dtype=np.float64)
            if x.ndim != 2 or x.shape[0] != n:
                raise ValueError("node_features must have one row per vertex")
            object.__setattr__(self, "node_features", _frozen_array(x))

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def neighbor_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency in CSR form: (indptr, indices), both int64.
        Neighbor lists are sorted, so traversal order is deterministic."""
        n = self.num_vertices
        e = self.edges
        if e.size == 0:
            return np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int64)
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, dst

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_vertices, dtype=np.int64)
        if self.edges.size:
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def relabel(self, perm: np.ndarray) -> "Graph":
        """Return the graph with vertex ``i`` renamed to ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.num_vertices)):
            raise ValueError("perm must be a permutation of vertex ids")
        e = perm[self.edges] if self.edges.size else self.edges
        x = None
        if self.node_features is not None:
            inv = np.empty_like(perm)
            inv[perm] = np.arange(self.num_vertices)
            x = self.node_features[inv]
        return Graph(self.num_vertices, e, x, self.graph_label)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        if self.num_vertices != other.num_vertices or self.graph_label != other.graph_label:
            return False
        if not np.array_equal(self.edges, other.edges):
            return False
        a, b = self.node_features, other.node_features
        if (a is None) != (b is None):
            return False
        return a is None or np.array_equal(a, b)


@dataclass(frozen=True)
class GraphDataset:
    """Named collection of graphs with contiguous 0-based labels."""

    name: str
    graphs: tuple[Graph, ...]
    num_classes: int

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))
        for g in self.graphs:
            if g.graph_label is None or not (0 <= g.graph_label < self.num_classes):
                raise ValueError("graph_label must lie in [0, num_classes)")

    def __len__(self) -> int:
        return len(self.graphs)

    def labels(self) -> np.ndarray:
        return np.array([g.graph_label for g in self.graphs], dtype=np.int64)


@dataclass(frozen=True)
class AugmentationSpec:
    """Random structural perturbation: kind is 'node_drop' or 'edge_drop',
    ratio is the dropped fraction in [0, 1), seed drives the draw."""

    kind: str
    ratio: float
    seed: int

    def __post_init__(self):
        if self.kind not in ("node_drop", "edge_drop"):
            raise ValueError(f"unknown augmentation kind {self.kind!r}")
        if not (0.0 <= self.ratio < 1.0):
            raise ValueError("ratio must lie in [0, 1)")


## ---------------------------------------------------------------- ingest

_REQUIRED = ("A", "graph_indicator", "graph_labels")


def _read_int_lines(path: Path, what: str) -> list[int]:
    out = []
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(int(line))
            except ValueError:
                raise IngestError(
                    "parse", f"{path.name}:{lineno}: expected an integer, got {line!r}"
                ) from None
    return out


def parse_tudataset(root: str | Path, name: str) -> GraphDataset:
    """Load a dataset stored in the TUDataset text layout.

    Expects ``<root>/<name>/<name>_A.txt`` (1-based comma-separated edge
    pairs, each undirected edge normally listed in both directions),
    ``..._graph_indicator.txt`` and ``..._graph_labels.txt``; optional
    ``..._node_labels.txt`` / ``..._node_attributes.txt``.

    Graph labels are remapped to contiguous 0-based ints.  Node features
    come from attributes when present, otherwise from a global one-hot
    encoding of node labels, otherwise a constant 1.0 column.  Repeated
    edge listings beyond the doubled convention are collapsed with a
    warning.
    """
    base = Path(root) / name
    paths = {key: base / f"{name}_{key}.txt" for key in _REQUIRED}
    for key, p in paths.items():
        if not p.is_file():
            raise IngestError("file", f"missing required file {p}")

    indicator = _read_int_lines(paths["graph_indicator"], "graph id")
    total_nodes = len(indicator)
    raw_labels = _read_int_lines(paths["graph_labels"], "graph label")
    num_graphs = len(raw_labels)
    if num_graphs == 0:
        raise IngestError("parse", "dataset has no graphs")
    if any(not (1 <= gid <= num_graphs) for gid in indicator):
        raise IngestError("parse", "graph_indicator entry out of range")

    node_graph = np.asarray(indicator, dtype=np.int64) - 1
    ## local index of each node inside its graph (nodes may interleave)
    counts = np.zeros(num_graphs, dtype=np.int64)
    local = np.empty(total_nodes, dtype=np.int64)
    for i, gid in enumerate(node_graph):
        local[i] = counts[gid]
        counts[gid] += 1

    edge_path = paths["A"]
    directed: list[tuple[int, int]] = []
    with open(edge_path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise IngestError("parse", f"{edge_path.name}:{lineno}: expected two ids")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise IngestError(
                    "parse", f"{edge_path.name}:{lineno}: expected integers, got {line!r}"
                ) from None
            if not (1 <= a <= total_nodes and 1 <= b <= total_nodes):
                raise IngestError("parse", f"{edge_path.name}:{lineno}: vertex id out of range")
            if a == b:
                raise IngestError("parse", f"{edge_path.name}:{lineno}: self-loop on vertex {a}")
            if node_graph[a - 1] != node_graph[b - 1]:
                raise IngestError(
                    "cross_graph_edge",
                    f"{edge_path.name}:{lineno}: edge ({a}, {b}) joins different graphs",
                )
            directed.append((a - 1, b - 1))

    per_graph_edges: list[set[tuple[int, int]]] = [set() for _ in range(num_graphs)]
    multiplicity: dict[tuple[int, int], int] = {}
    for a, b in directed:
        gid = node_graph[a]
        u, v = local[a], local[b]
        key = (gid, min(u, v), max(u, v))
        multiplicity[key] = multiplicity.get(key, 0) + 1
        per_graph_edges[gid].add((min(u, v), max(u, v)))
    extra = sum(1 for c in multiplicity.values() if c > 2)
    if extra:
        warnings.warn(
            f"{name}: {extra} edge(s) listed more than twice were deduplicated",
            stacklevel=2,
        )

    features = _node_feature_matrix(base, name, total_nodes)

    uniq = sorted(set(raw_labels))
    remap = {lab: i for i, lab in enumerate(uniq)}

    graphs = []
    node_rows: list[list[int]] = [[] for _ in range(num_graphs)]
    for i, gid in enumerate(node_graph):
        node_rows[gid].append(i)
    for gid in range(num_graphs):
        n = int(counts[gid])
        edges = np.array(sorted(per_graph_edges[gid]), dtype=np.int64).reshape(-1, 2)
        x = features[node_rows[gid]] if features is not None else None
        graphs.append(Graph(n, edges, x, remap[raw_labels[gid]]))
    return GraphDataset(name, tuple(graphs), len(uniq))


def _node_feature_matrix(base: Path, name: str, total_nodes: int) -> np.ndarray | None:
    attr_path = base / f"{name}_node_attributes.txt"
    label_path = base / f"{name}_node_labels.txt"
    if attr_path.is_file():
        rows = []
        with open(attr_path, "r") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rows.append([float(tok) for tok in line.replace(",", " ").split()])
                except ValueError:
                    raise IngestError(
                        "parse", f"{attr_path.name}:{lineno}: expected real values"
                    ) from None
        if len(rows) != total_nodes:
            raise IngestError("parse", f"{attr_path.name}: expected {total_nodes} rows")
        return np.asarray(rows, dtype=np.float64)
    if label_path.is_file():
        labs = _read_int_lines(label_path, "node label")
        if len(labs) != total_nodes:
            raise IngestError("parse", f"{label_path.name}: expected {total_nodes} rows")
        uniq = sorted(set(labs))
        col = {lab: j for j, lab in enumerate(uniq)}
        x = np.zeros((total_nodes, len(uniq)), dtype=np.float64)
        for i, lab in enumerate(labs):
            x[i, col[lab]] = 1.0
        return x
    return np.ones((total_nodes, 1), dtype=np.float64)


def write_tudataset(dataset: GraphDataset, root: str | Path) -> Path:
    """Write ``dataset`` in the TUDataset layout under ``<root>/<name>``.

    Integer fields round-trip bit-exactly; real node features are written
    as node attributes with six decimal places.  Each undirected edge is
    listed in both directions, mirroring the usual file convention.
    """
    base = Path(root) / dataset.name
    base.mkdir(parents=True, exist_ok=True)
    name = dataset.name
    offsets = np.cumsum([0] + [g.num_vertices for g in dataset.graphs])

    with open(base / f"{name}_A.txt", "w") as fh:
        for gid, g in enumerate(dataset.graphs):
            off = offsets[gid] + 1
            for u, v in g.edges:
                fh.write(f"{off + u}, {off + v}\n")
                fh.write(f"{off + v}, {off + u}\n")
    with open(base / f"{name}_graph_indicator.txt", "w") as fh:
        for gid, g in enumerate(dataset.graphs):
            fh.writelines(f"{gid + 1}\n" for _ in range(g.num_vertices))
    with open(base / f"{name}_graph_labels.txt", "w") as fh:
        for g in dataset.graphs:
            fh.write(f"{g.graph_label}\n")
    if any(g.node_features is not None for g in dataset.graphs):
        with open(base / f"{name}_node_attributes.txt", "w") as fh:
            for g in dataset.graphs:
                x = g.node_features
                if x is None:
                    x = np.ones((g.num_vertices, 1), dtype=np.float64)
                for row in x:
                    fh.write(", ".join(f"{v:.6f}" for v in row) + "\n")
    return base


## ----------------------------------------------------------- augmentation


def augment(graph: Graph, spec: AugmentationSpec) -> Graph:
    """Return a perturbed copy of ``graph`` drawn deterministically from
    ``spec.seed``.

    node_drop removes ``floor(ratio * num_vertices)`` uniformly chosen
    vertices (with their incident edges) and compacts the ids; edge_drop
    removes ``floor(ratio * num_edges)`` uniformly chosen edges.
    """
    if graph.num_vertices == 0:
        raise AugmentError("empty", "cannot augment an empty graph")
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "node_drop":
        k = int(spec.ratio * graph.num_vertices)
        if k == 0:
            return graph
        drop = rng.choice(graph.num_vertices, size=k, replace=False)
        keep_mask = np.ones(graph.num_vertices, dtype=bool)
        keep_mask[drop] = False
        keep = np.flatnonzero(keep_mask)
        new_id = -np.ones(graph.num_vertices, dtype=np.int64)
        new_id[keep] = np.arange(keep.size)
        e = graph.edges
        if e.size:
            ok = keep_mask[e[:, 0]] & keep_mask[e[:, 1]]
            e = new_id[e[ok]]
        x = graph.node_features[keep] if graph.node_features is not None else None
        return Graph(keep.size, e, x, graph.graph_label)
    ## edge_drop
    k = int(spec.ratio * graph.num_edges)
    if k == 0:
        return graph
    drop = rng.choice(graph.num_edges, size=k, replace=False)
    keep_mask = np.ones(graph.num_edges, dtype=bool)
    keep_mask[drop] = False
    return Graph(
        graph.num_vertices, graph.edges[keep_mask], graph.node_features, graph.graph_label
    )


def inject_feature_noise(
    dataset: GraphDataset, fraction: float, mean: float, std: float, seed: int = 0
) -> GraphDataset:
    """Add i.i.d. Gaussian noise to the node features of
    ``floor(fraction * len(dataset))`` uniformly chosen graphs.

    Labels and topology are untouched.  ``std == 0`` adds the constant
    ``mean`` exactly.  The graphs to perturb are chosen first, then noise
    is drawn per chosen graph in index order, all from one generator.
    """
    if not (0.0 <= fraction <= 1.0):
        raise ValueError("fraction must lie in [0, 1]")
    if std < 0:
        raise ValueError("std must be >= 0")
    if any(g.node_features is None for g in dataset.graphs):
        raise NoiseError("no_features", "every graph needs node_features")
    rng = np.random.default_rng(seed)
    k = int(fraction * len(dataset.graphs))
    chosen = set()
    if k:
        chosen = set(rng.choice(len(dataset.graphs), size=k, replace=False).tolist())
    out = []
    for i, g in enumerate(dataset.graphs):
        if i in chosen:
            noise = rng.normal(mean, std, size=g.node_features.shape)
            out.append(Graph(g.num_vertices, g.edges, g.node_features + noise, g.graph_label))
        else:
            out.append(g)
    return GraphDataset(dataset.name, tuple(out), dataset.num_classes)


## ----------------------------------------------------------- random graphs


def random_graph(num_vertices: int, edge_prob: float, seed: int) -> Graph:
    """Erdos-Renyi style graph: each vertex pair kept with ``edge_prob``."""
    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u in range(num_vertices) for v in range(u + 1, num_vertices)]
    if pairs:
        mask = rng.random(len(pairs)) < edge_prob
        edges = np.array([p for p, m in zip(pairs, mask) if m], dtype=np.int64).reshape(-1, 2)
    else:
        edges = np.empty((0, 2), dtype=np.int64)
    return Graph(num_vertices, edges)


def random_connected_graph(num_vertices: int, num_edges: int, seed: int) -> Graph:
    """Random connected graph: a random attachment tree plus extra
    uniformly drawn edges (deduplicated) until ``num_edges`` are present."""
    if num_edges < num_vertices - 1:
        raise ValueError("need at least num_vertices - 1 edges for connectivity")
    cap = num_vertices * (num_vertices - 1) // 2
    if num_edges > cap:
        raise ValueError(f"{num_vertices} vertices admit at most {cap} edges")
    rng = np.random.default_rng(seed)
    order = rng.permutation(num_vertices)
    seen: set[tuple[int, int]] = set()
    rows = []
    for i in range(1, num_vertices):
        a = int(order[i])
        b = int(order[rng.integers(0, i)])
        key = (min(a, b), max(a, b))
        seen.add(key)
        rows.append(key)
    while len(rows) < num_edges:
        a, b = rng.integers(0, num_vertices, size=2)
        if a == b:
            continue
        key = (min(int(a), int(b)), max(int(a), int(b)))
        if key in seen:
            continue
        seen.add(key)
        rows.append(key)
    return Graph(num_vertices, np.array(rows, dtype=np.int64))
