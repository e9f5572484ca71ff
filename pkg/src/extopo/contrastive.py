"""Contrastive objectives over paired graph views, an MLP head for
topological feature vectors, and a small deterministic trainer.

The loss is the normalized-temperature cross entropy on cosine
similarities: each row's positive is the other view of its graph and
the denominator runs over every other row, the positive included.
Gradients are computed analytically (the MLP is trained by plain
fixed-step gradient descent) and checked against central finite
differences; nothing here depends on an autodiff framework.

Rows are paired by convention: row 2i is view 0 and row 2i + 1 is
view 1 of graph i, unless explicit index arrays say otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LossError
from .graphs import AugmentationSpec, Graph, GraphDataset, augment
from .persistence import epd_bundle
from .filtration import make_bundle
from .vectorization import FeatureConfig, featurize_diagrams, fit_feature_config

__all__ = [
    "EmbeddingBatch",
    "LossConfig",
    "EtlMlp",
    "TrainResult",
    "ntxent_loss",
    "combined_loss",
    "etl_init",
    "etl_forward",
    "grad_check",
    "train_topo",
    "encode_graph_baseline",
]


## -------------------------------------------------------------------- types


def _paired_indices(n_rows: int) -> tuple[np.ndarray, np.ndarray]:
    if n_rows % 2 or n_rows == 0:
        raise LossError("shape", f"need a positive even row count, got {n_rows}")
    graph_index = np.repeat(np.arange(n_rows // 2), 2)
    view_index = np.tile(np.array([0, 1]), n_rows // 2)
    return graph_index, view_index


@dataclass(frozen=True)
class EmbeddingBatch:
    """2T x d embedding rows labelled with (graph, view).

    Every graph index must appear exactly twice, once per view, and no
    row may be zero (cosine similarity would be undefined).
    """

    rows: np.ndarray
    graph_index: np.ndarray
    view_index: np.ndarray

    def __post_init__(self):
        rows = np.ascontiguousarray(np.asarray(self.rows, dtype=np.float64))
        gi = np.asarray(self.graph_index, dtype=np.intp)
        vi = np.asarray(self.view_index, dtype=np.intp)
        if rows.ndim != 2 or gi.shape != (rows.shape[0],) or vi.shape != (rows.shape[0],):
            raise LossError("shape", "rows and index arrays disagree")
        if not np.all(np.isfinite(rows)):
            raise LossError("degenerate", "non-finite embedding rows")
        if np.any(np.linalg.norm(rows, axis=1) == 0.0):
            raise LossError("degenerate", "zero embedding row")
        pairs = sorted(zip(gi.tolist(), vi.tolist()))
        want = sorted((g, v) for g in set(gi.tolist()) for v in (0, 1))
        if pairs != want or len(pairs) != rows.shape[0]:
            raise LossError("shape", "each graph needs exactly views 0 and 1")
        for name, arr in (("rows", rows), ("graph_index", gi), ("view_index", vi)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_views(cls, view0: np.ndarray, view1: np.ndarray) -> "EmbeddingBatch":
        """Interleave per-view matrices: graph i lands on rows 2i, 2i+1."""
        view0 = np.asarray(view0, dtype=np.float64)
        view1 = np.asarray(view1, dtype=np.float64)
        if view0.shape != view1.shape or view0.ndim != 2:
            raise LossError("shape", "views must be matrices of one shape")
        rows = np.empty((2 * view0.shape[0], view0.shape[1]))
        rows[0::2] = view0
        rows[1::2] = view1
        gi, vi = _paired_indices(rows.shape[0])
        return cls(rows, gi, vi)

    def n_graphs(self) -> int:
        return self.rows.shape[0] // 2

    def positive_of(self) -> np.ndarray:
        """positive_of()[i] = row index of the other view of row i."""
        slot = {}
        for r, (g, v) in enumerate(zip(self.graph_index.tolist(), self.view_index.tolist())):
            slot[(g, v)] = r
        return np.array(
            [slot[(g, 1 - v)] for g, v in zip(self.graph_index, self.view_index)],
            dtype=np.intp,
        )


@dataclass(frozen=True)
class LossConfig:
    zeta: float = 0.2
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.zeta <= 0:
            raise ValueError(f"temperature must be positive, got {self.zeta}")
        if self.alpha < 0 or self.beta < 0 or (self.alpha == 0 and self.beta == 0):
            raise ValueError("weights must be nonnegative and not both zero")


@dataclass(frozen=True)
class EtlMlp:
    """Affine layers with rectifier activations, final layer linear.
    weights[k] has shape (fan_in, fan_out); forward is x @ W + b."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self):
        ws = tuple(np.ascontiguousarray(np.asarray(w, dtype=np.float64)) for w in self.weights)
        bs = tuple(np.ascontiguousarray(np.asarray(b, dtype=np.float64)) for b in self.biases)
        if len(ws) != len(bs) or not ws:
            raise LossError("shape", "need one bias per weight matrix")
        for k, (w, b) in enumerate(zip(ws, bs)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise LossError("shape", f"layer {k}: weight {w.shape} vs bias {b.shape}")
            if k and ws[k - 1].shape[1] != w.shape[0]:
                raise LossError("shape", f"layer {k} input disagrees with layer {k - 1} output")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise LossError("shape", f"layer {k}: non-finite parameters")
        for arr in (*ws, *bs):
            arr.flags.writeable = False
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    def widths(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))


def etl_init(sizes: Sequence[int], seed: int = 0) -> EtlMlp:
    """Gaussian weights scaled by sqrt(2 / fan_in), zero biases."""
    sizes = [int(s) for s in sizes]
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise LossError("shape", f"need at least input and output widths, got {sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return EtlMlp(tuple(weights), tuple(biases))


## ------------------------------------------------------------------- losses


def _cosine_rows(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0.0):
        raise LossError("degenerate", "zero embedding row")
    return rows / norms[:, None], norms


def _per_anchor(batch: EmbeddingBatch, zeta: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(per-anchor losses, softmax over others, unit rows)."""
    unit, _ = _cosine_rows(batch.rows)
    scaled = (unit @ unit.T) / zeta
    np.fill_diagonal(scaled, -np.inf)
    row_max = scaled.max(axis=1)
    shifted = np.exp(scaled - row_max[:, None])
    denom = shifted.sum(axis=1)
    log_denom = row_max + np.log(denom)
    pos = batch.positive_of()
    per = log_denom - scaled[np.arange(scaled.shape[0]), pos]
    return per, shifted / denom[:, None], unit


def ntxent_loss(batch: EmbeddingBatch, zeta: float = 0.2) -> tuple[float, np.ndarray]:
    """Mean loss over all 2T anchors, plus the per-anchor vector.

    For anchor i with positive p: -log of exp(sim(i,p)/zeta) over the
    sum of exp(sim(i,g)/zeta) for every other row g, positive included.
    """
    if zeta <= 0:
        raise ValueError(f"temperature must be positive, got {zeta}")
    per, _, _ = _per_anchor(batch, zeta)
    return float(per.mean()), per


def combined_loss(
    graph_batch: EmbeddingBatch,
    topo_batch: EmbeddingBatch,
    cfg: LossConfig,
    mean: bool = False,
) -> float:
    """alpha * sum of graph-branch anchor losses + beta * sum of the
    topological-branch ones; ``mean`` swaps the sums for means."""
    if (
        graph_batch.rows.shape[0] != topo_batch.rows.shape[0]
        or not np.array_equal(graph_batch.graph_index, topo_batch.graph_index)
        or not np.array_equal(graph_batch.view_index, topo_batch.view_index)
    ):
        raise LossError("alignment", "batches must label the same (graph, view) rows")
    _, per_g = ntxent_loss(graph_batch, cfg.zeta)
    _, per_t = ntxent_loss(topo_batch, cfg.zeta)
    reduce = np.mean if mean else np.sum
    return float(cfg.alpha * reduce(per_g) + cfg.beta * reduce(per_t))


## ------------------------------------------------------------- forward/backward


def _forward(mlp: EtlMlp, feats: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Output rows plus every layer input (pre-activation cache)."""
    if feats.ndim != 2 or feats.shape[1] != mlp.weights[0].shape[0]:
        raise LossError(
            "shape",
            f"features {feats.shape} do not fit input width {mlp.weights[0].shape[0]}",
        )
    acts = [feats]
    a = feats
    last = len(mlp.weights) - 1
    for k, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        a = a @ w + b
        if k < last:
            a = np.maximum(a, 0.0)
        acts.append(a)
    return a, acts


def etl_forward(
    mlp: EtlMlp,
    feats: np.ndarray,
    graph_index: np.ndarray | None = None,
    view_index: np.ndarray | None = None,
) -> EmbeddingBatch:
    """Run the MLP over feature rows and label them as a paired batch.
    Without explicit indices, rows 2i and 2i+1 are the views of graph i.
    """
    feats = np.asarray(feats, dtype=np.float64)
    out, _ = _forward(mlp, feats)
    if graph_index is None or view_index is None:
        graph_index, view_index = _paired_indices(out.shape[0])
    return EmbeddingBatch(out, graph_index, view_index)


def _loss_and_grads(
    mlp: EtlMlp, feats: np.ndarray, zeta: float
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean anchor loss and its parameter gradients, analytically."""
    out, acts = _forward(mlp, feats)
    gi, vi = _paired_indices(out.shape[0])
    batch = EmbeddingBatch(out, gi, vi)
    per, soft, unit = _per_anchor(batch, zeta)
    n = out.shape[0]
    pos = batch.positive_of()
    # d(mean loss)/d(similarity matrix): softmax weight minus the
    # positive indicator, per anchor row, temperature-scaled
    a_mat = soft.copy()
    a_mat[np.arange(n), pos] -= 1.0
    a_mat /= zeta * n
    g_unit = (a_mat + a_mat.T) @ unit
    norms = np.linalg.norm(batch.rows, axis=1)
    radial = np.sum(g_unit * unit, axis=1, keepdims=True)
    delta = (g_unit - radial * unit) / norms[:, None]
    d_weights: list[np.ndarray] = [np.empty(0)] * len(mlp.weights)
    d_biases: list[np.ndarray] = [np.empty(0)] * len(mlp.biases)
    for k in range(len(mlp.weights) - 1, -1, -1):
        d_weights[k] = acts[k].T @ delta
        d_biases[k] = delta.sum(axis=0)
        if k:
            delta = (delta @ mlp.weights[k].T) * (acts[k] > 0.0)
    return float(per.mean()), d_weights, d_biases


def grad_check(
    mlp: EtlMlp,
    feats: np.ndarray,
    cfg: LossConfig,
    h: float = 1e-5,
    n_params: int = 50,
    seed: int = 0,
) -> float:
    """Max relative error between analytic parameter gradients and
    central finite differences on randomly sampled coordinates.

    The relative error divides by max(|analytic|, |difference|, 1e-8)
    so flat regions compare absolutely instead of blowing up.
    """
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    feats = np.asarray(feats, dtype=np.float64)
    _, d_weights, d_biases = _loss_and_grads(mlp, feats, cfg.zeta)
    flat_grad = np.concatenate([g.ravel() for g in d_weights + d_biases])
    total = flat_grad.shape[0]
    rng = np.random.default_rng(seed)
    picks = np.arange(total) if total <= n_params else rng.choice(total, n_params, replace=False)

    def loss_with(flat: np.ndarray) -> float:
        ws, bs, at = [], [], 0
        for w in mlp.weights:
            ws.append(flat[at : at + w.size].reshape(w.shape))
            at += w.size
        for b in mlp.biases:
            bs.append(flat[at : at + b.size])
            at += b.size
        out, _ = _forward(EtlMlp(tuple(ws), tuple(bs)), feats)
        gi, vi = _paired_indices(out.shape[0])
        per, _, _ = _per_anchor(EmbeddingBatch(out, gi, vi), cfg.zeta)
        return float(per.mean())

    flat0 = np.concatenate([w.ravel() for w in mlp.weights] + [b for b in mlp.biases])
    worst = 0.0
    for idx in picks:
        up, down = flat0.copy(), flat0.copy()
        up[idx] += h
        down[idx] -= h
        fd = (loss_with(up) - loss_with(down)) / (2.0 * h)
        err = abs(fd - flat_grad[idx]) / max(abs(fd), abs(flat_grad[idx]), 1e-8)
        worst = max(worst, err)
    return worst


## ------------------------------------------------------------------ trainer


@dataclass(frozen=True)
class TrainResult:
    mlp: EtlMlp
    losses: tuple[float, ...]
    feature_config: FeatureConfig
    feat_mean: np.ndarray
    feat_scale: np.ndarray


def _view_seed(seed: int, epoch: int, graph: int, view: int) -> int:
    return int(np.random.SeedSequence((seed, epoch, graph, view)).generate_state(1)[0])


def train_topo(
    ds: GraphDataset,
    filtrations: Sequence[str],
    summary: str = "EPL",
    cfg: LossConfig = LossConfig(),
    epochs: int = 50,
    seed: int = 0,
    *,
    step: float = 5e-3,
    drop_ratio: float = 0.05,
    hidden: Sequence[int] = (128,),
    out_dim: int = 64,
    summary_params: dict | None = None,
) -> TrainResult:
    """Contrastive training of the topological head, full batch.

    Grids and bounds are fitted once on the unaugmented dataset.  The
    per-coordinate standardization is fitted on those base features plus
    one reference pass of augmented views, with the scale floored at
    1e-3 of its largest entry: coordinates the base corpus holds nearly
    constant would otherwise blow augmented rows up by their tiny
    standard deviations.  Each epoch draws two node-drop views per graph
    with seeds derived from (seed, epoch, graph, view), so traces are
    exactly reproducible.  The recorded loss is the per-anchor sum whose
    gradient drives that epoch's fixed-step descent update.
    """
    params = dict(summary_params or {})
    base_rows = []
    for graph in ds.graphs:
        bundle = make_bundle(graph, filtrations)
        base_rows.append(epd_bundle(graph, bundle))
    fcfg = fit_feature_config(base_rows, filtrations, summary, **params)
    base_feats = np.vstack([featurize_diagrams(row, fcfg).values for row in base_rows])

    def view_pass(epoch: int, mean: np.ndarray, scale: np.ndarray) -> np.ndarray:
        rows = []
        for gi, graph in enumerate(ds.graphs):
            for view in (0, 1):
                spec = AugmentationSpec("node_drop", drop_ratio, _view_seed(seed, epoch, gi, view))
                view_graph = augment(graph, spec)
                bundle = make_bundle(view_graph, filtrations)
                vec = featurize_diagrams(epd_bundle(view_graph, bundle), fcfg).values
                rows.append((vec - mean) / scale)
        return np.vstack(rows)

    # reference epoch outside the training range, so the fit never reuses a view
    zero, one = np.zeros(fcfg.length()), np.ones(fcfg.length())
    fit = np.vstack([base_feats, view_pass(2**31, zero, one)])
    feat_mean = fit.mean(axis=0)
    feat_scale = fit.std(axis=0)
    top = feat_scale.max()
    feat_scale = np.maximum(feat_scale, 1e-3 * top) if top > 0.0 else one

    mlp = etl_init([fcfg.length(), *hidden, out_dim], seed)
    n_rows = 2 * len(ds.graphs)
    losses: list[float] = []
    for epoch in range(epochs):
        feats = view_pass(epoch, feat_mean, feat_scale)
        loss, d_w, d_b = _loss_and_grads(mlp, feats, cfg.zeta)
        mlp = EtlMlp(
            tuple(w - step * n_rows * g for w, g in zip(mlp.weights, d_w)),
            tuple(b - step * n_rows * g for b, g in zip(mlp.biases, d_b)),
        )
        losses.append(loss * n_rows)
    return TrainResult(mlp, tuple(losses), fcfg, feat_mean, feat_scale)


def _with_features(g: Graph) -> Graph:
    """Fall back to the degree column when a graph carries no features."""
    if g.node_features is not None:
        return g
    indptr, _ = g.neighbor_csr()
    deg = np.diff(indptr).astype(np.float64)[:, None]
    return Graph(g.num_vertices, g.edges, deg, g.graph_label)


def train_joint(
    ds: GraphDataset,
    filtrations: Sequence[str],
    summary: str = "EPL",
    cfg: LossConfig = LossConfig(),
    epochs: int = 50,
    seed: int = 0,
    *,
    step: float = 5e-3,
    drop_ratio: float = 0.05,
    hidden: Sequence[int] = (128,),
    out_dim: int = 64,
    summary_params: dict | None = None,
    baseline_rounds: int = 2,
    baseline_width: int | None = 32,
) -> TrainResult:
    """Joint trace: the fixed baseline graph encoder plus the trainable
    topological head, combined with the configured branch weights.

    Both branches see the same augmented view graphs each epoch.  Only
    the topological head has parameters, so the update scales its
    gradient by the topological branch weight; the graph branch
    contributes loss values only.  Graphs without node features feed the
    baseline encoder their degree column.
    """
    params = dict(summary_params or {})
    base_rows = []
    for graph in ds.graphs:
        bundle = make_bundle(graph, filtrations)
        base_rows.append(epd_bundle(graph, bundle))
    fcfg = fit_feature_config(base_rows, filtrations, summary, **params)
    base_feats = np.vstack([featurize_diagrams(row, fcfg).values for row in base_rows])

    def views(epoch: int) -> list[Graph]:
        out = []
        for gi, graph in enumerate(ds.graphs):
            for view in (0, 1):
                spec = AugmentationSpec("node_drop", drop_ratio, _view_seed(seed, epoch, gi, view))
                out.append(augment(graph, spec))
        return out

    def topo_rows(view_graphs: list[Graph], mean: np.ndarray, scale: np.ndarray) -> np.ndarray:
        rows = []
        for vg in view_graphs:
            vec = featurize_diagrams(epd_bundle(vg, make_bundle(vg, filtrations)), fcfg).values
            rows.append((vec - mean) / scale)
        return np.vstack(rows)

    zero, one = np.zeros(fcfg.length()), np.ones(fcfg.length())
    fit = np.vstack([base_feats, topo_rows(views(2**31), zero, one)])
    feat_mean = fit.mean(axis=0)
    feat_scale = fit.std(axis=0)
    top = feat_scale.max()
    feat_scale = np.maximum(feat_scale, 1e-3 * top) if top > 0.0 else one

    mlp = etl_init([fcfg.length(), *hidden, out_dim], seed)
    n_rows = 2 * len(ds.graphs)
    graph_index, view_index = _paired_indices(n_rows)
    losses: list[float] = []
    for epoch in range(epochs):
        view_graphs = views(epoch)
        feats = topo_rows(view_graphs, feat_mean, feat_scale)
        topo_mean, d_w, d_b = _loss_and_grads(mlp, feats, cfg.zeta)
        graph_rows = np.vstack(
            [
                encode_graph_baseline(_with_features(vg), baseline_rounds, baseline_width, seed)
                for vg in view_graphs
            ]
        )
        graph_batch = EmbeddingBatch(graph_rows, graph_index, view_index)
        per_g, _, _ = _per_anchor(graph_batch, cfg.zeta)
        combined = cfg.alpha * float(per_g.sum()) + cfg.beta * topo_mean * n_rows
        scale_step = step * cfg.beta * n_rows
        mlp = EtlMlp(
            tuple(w - scale_step * g for w, g in zip(mlp.weights, d_w)),
            tuple(b - scale_step * g for b, g in zip(mlp.biases, d_b)),
        )
        losses.append(combined)
    return TrainResult(mlp, tuple(losses), fcfg, feat_mean, feat_scale)


## ----------------------------------------------------------- graph baseline


def encode_graph_baseline(
    g: Graph, rounds: int = 2, width: int | None = 32, seed: int = 0
) -> np.ndarray:
    """Mean-pooled embedding after closed-neighborhood mean rounds and
    an optional fixed random linear map with rectifier.

    width None skips the map and the rectifier entirely.  Deterministic
    in (g, rounds, width, seed) and invariant under vertex relabeling.
    """
    if g.node_features is None:
        raise LossError("shape", "baseline encoder needs node features")
    feats = np.asarray(g.node_features, dtype=np.float64)
    indptr, indices = g.neighbor_csr()
    n = g.num_vertices
    for _ in range(rounds):
        agg = feats.copy()  # closed neighborhood: the vertex plus its neighbors
        np.add.at(agg, np.repeat(np.arange(n), np.diff(indptr)), feats[indices])
        feats = agg / (1.0 + np.diff(indptr))[:, None]
    if width is not None:
        rng = np.random.default_rng(seed)
        w = rng.normal(0.0, 1.0 / np.sqrt(feats.shape[1]), (feats.shape[1], int(width)))
        feats = np.maximum(feats @ w, 0.0)
    return feats.mean(axis=0)
