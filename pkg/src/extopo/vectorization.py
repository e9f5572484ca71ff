"""Vector summaries of extended persistence diagrams.

Two summaries are provided.  Landscapes sample, on a shared grid, the
k-th largest tent function over above-diagonal points and the k-th most
negative tent over below-diagonal points; keeping the two signs separate
means ordinary and relative/essential-cycle structure never cancel.
Images integrate a weighted Gaussian per diagram point over each grid
box, exactly, via differences of the normal CDF.

Batch featurization fixes grids, bounds, and bandwidths once (from a
fitting split) so that vectors from different graphs are comparable.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr

from ._backend import USING_NUMBA
from ._kernels import _kth_largest_tents
from .errors import VectorizeError
from .filtration import make_bundle
from .graphs import Graph
from .persistence import EPDPoint, ExtendedPersistenceDiagram, epd_bundle

__all__ = [
    "LandscapeSet",
    "PersistenceImage",
    "FeatureVector",
    "LandscapePlan",
    "ImagePlan",
    "FeatureConfig",
    "tent_value",
    "landscape_grid",
    "landscape",
    "persistence_image",
    "fit_feature_config",
    "featurize_diagrams",
    "featurize",
    "write_feature_csv",
    "read_feature_csv",
    "save_landscape",
    "load_landscape",
]


## ---------------------------------------------------------------- summaries


@dataclass(frozen=True)
class LandscapeSet:
    """Sampled landscape levels for one diagram.

    ``pos_levels[k]`` is the (k+1)-th largest tent over points with
    birth < death, ``neg_levels[k]`` the (k+1)-th most negative tent
    over points with death < birth.  Both are k_max x len(t_grid).
    """

    k_max: int
    t_grid: np.ndarray
    pos_levels: np.ndarray
    neg_levels: np.ndarray

    def __post_init__(self):
        grid = np.ascontiguousarray(np.asarray(self.t_grid, dtype=np.float64))
        pos = np.asarray(self.pos_levels, dtype=np.float64)
        neg = np.asarray(self.neg_levels, dtype=np.float64)
        shape = (self.k_max, grid.shape[0])
        if self.k_max < 1 or grid.ndim != 1 or pos.shape != shape or neg.shape != shape:
            raise VectorizeError("grid", "landscape arrays disagree with k_max and grid")
        for name, arr in (("t_grid", grid), ("pos_levels", pos), ("neg_levels", neg)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LandscapeSet):
            return NotImplemented
        return (
            self.k_max == other.k_max
            and np.array_equal(self.t_grid, other.t_grid)
            and np.array_equal(self.pos_levels, other.pos_levels)
            and np.array_equal(self.neg_levels, other.neg_levels)
        )


@dataclass(frozen=True)
class PersistenceImage:
    """Grid of exactly integrated Gaussian mass in the raw (birth, death)
    plane.  Row i spans the i-th death slab from bounds[2] upward, column
    j the j-th birth slab from bounds[0] rightward.
    """

    resolution: tuple[int, int]
    bounds: tuple[float, float, float, float]
    sigma: tuple[float, float]
    pixels: np.ndarray

    def __post_init__(self):
        pix = np.asarray(self.pixels, dtype=np.float64)
        if pix.shape != tuple(self.resolution):
            raise VectorizeError("grid", "pixel matrix disagrees with resolution")
        pix.flags.writeable = False
        object.__setattr__(self, "pixels", pix)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PersistenceImage):
            return NotImplemented
        return (
            self.resolution == other.resolution
            and self.bounds == other.bounds
            and self.sigma == other.sigma
            and np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True)
class FeatureVector:
    """Flat per-graph feature vector plus the layout that produced it.

    ``layout`` is an ordered tuple of (function_name, summary_kind,
    block_shape); block lengths must add up to len(values).
    """

    values: np.ndarray
    layout: tuple[tuple[str, str, tuple[int, ...]], ...]

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if vals.ndim != 1:
            raise ValueError("feature values must be a flat vector")
        total = sum(int(np.prod(shape)) for _, _, shape in self.layout)
        if total != vals.shape[0]:
            raise ValueError(f"layout covers {total} values, vector has {vals.shape[0]}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "layout", tuple(self.layout))

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.layout == other.layout and np.array_equal(self.values, other.values)

    def column_names(self) -> list[str]:
        names = []
        for fn_name, summary, shape in self.layout:
            for i in range(int(np.prod(shape))):
                names.append(f"{fn_name}:{summary}:{i}")
        return names


## -------------------------------------------------------------------- tents


def tent_value(point: EPDPoint, t):
    """Piecewise-linear hat of the point, negated for death < birth.

    Supported on [birth, death] (or the reflected interval), slopes +-1,
    peak |death - birth| / 2 at the midpoint.  Zero-persistence points
    give the zero function.  ``t`` may be a scalar or an array.
    """
    t = np.asarray(t, dtype=np.float64)
    lo, hi = sorted((point.birth, point.death))
    h = np.maximum(0.0, np.minimum(t - lo, hi - t))
    out = -h if point.death < point.birth else h
    return float(out) if out.ndim == 0 else out


def _coords(epd: ExtendedPersistenceDiagram) -> np.ndarray:
    return np.array([c for p in epd.points for c in (p.birth, p.death)], dtype=np.float64)


def _side_intervals(epd: ExtendedPersistenceDiagram, sign: int) -> tuple[np.ndarray, np.ndarray]:
    """(lo, hi) arrays of the tents on one side of the diagonal."""
    if sign > 0:
        pts = [(p.birth, p.death) for p in epd.points if p.birth < p.death]
    else:
        pts = [(p.death, p.birth) for p in epd.points if p.death < p.birth]
    arr = np.array(pts, dtype=np.float64).reshape(-1, 2)
    return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])


def landscape_grid(epds, spec="uniform", n_samples: int = 50) -> np.ndarray:
    """Resolve a grid spec against one diagram or a list of them.

    ``"uniform"``: n_samples evenly spaced over the coordinate range.
    ``"critical"``: every distinct coordinate value plus the midpoint of
    each consecutive pair (2 * tau - 1 points for tau distinct values).
    An explicit array is validated and used as is.
    """
    if isinstance(epds, ExtendedPersistenceDiagram):
        epds = [epds]
    if not isinstance(spec, str):
        grid = np.asarray(spec, dtype=np.float64)
        if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
            raise VectorizeError("grid", "explicit grid must be a nonempty finite vector")
        if np.any(np.diff(grid) <= 0):
            raise VectorizeError("grid", "explicit grid must be strictly increasing")
        return grid
    coords = np.concatenate([_coords(e) for e in epds]) if epds else np.empty(0)
    if spec == "uniform":
        if n_samples < 1:
            raise VectorizeError("grid", "n_samples must be at least 1")
        lo, hi = (coords.min(), coords.max()) if coords.size else (0.0, 1.0)
        if lo == hi:
            # degenerate range: a single-sample span around the value
            lo, hi = lo - 0.5, hi + 0.5
        return np.linspace(lo, hi, n_samples)
    if spec == "critical":
        if coords.size == 0:
            return np.zeros(1)
        vals = np.unique(coords)
        mids = (vals[:-1] + vals[1:]) / 2.0
        out = np.empty(vals.size + mids.size)
        out[0::2] = vals
        out[1::2] = mids
        return out
    raise VectorizeError("grid", f"unknown grid spec {spec!r}")


def _tent_levels(lo: np.ndarray, hi: np.ndarray, grid: np.ndarray, k_max: int) -> np.ndarray:
    """Top k_max tent values per grid point, descending, zero-padded.

    The compiled path and the vectorized one evaluate the same float
    expression min(t - lo, hi - t) clipped at 0, so they agree bitwise.
    """
    if USING_NUMBA:
        return _kth_largest_tents(lo, hi, grid, k_max)
    if lo.shape[0] == 0:
        return np.zeros((k_max, grid.shape[0]))
    h = np.minimum(grid[None, :] - lo[:, None], hi[:, None] - grid[None, :])
    np.clip(h, 0.0, None, out=h)
    if h.shape[0] < k_max:
        h = np.vstack([h, np.zeros((k_max - h.shape[0], grid.shape[0]))])
    h.sort(axis=0)
    return np.ascontiguousarray(h[::-1][:k_max])


def landscape(epd: ExtendedPersistenceDiagram, k_max: int = 2, grid="uniform",
              n_samples: int = 50) -> LandscapeSet:
    if k_max < 1:
        raise VectorizeError("grid", "k_max must be at least 1")
    t_grid = landscape_grid(epd, grid, n_samples)
    lo, hi = _side_intervals(epd, +1)
    pos = _tent_levels(lo, hi, t_grid, k_max)
    lo, hi = _side_intervals(epd, -1)
    neg = -_tent_levels(lo, hi, t_grid, k_max) + 0.0  # +0.0 clears -0.0
    return LandscapeSet(k_max, t_grid, pos, neg)


## ------------------------------------------------------------------- images


def _point_weights(epd: ExtendedPersistenceDiagram, weight: str) -> np.ndarray:
    if weight == "persistence":
        return np.array([abs(p.death - p.birth) for p in epd.points], dtype=np.float64)
    if weight == "constant":
        return np.ones(len(epd.points))
    raise ValueError(f"weight must be 'persistence' or 'constant', got {weight!r}")


def default_sigma(epds) -> float:
    """0.05 times the larger coordinate spread of the two axes; an
    absolute 0.05 when the diagrams are empty or a single point."""
    if isinstance(epds, ExtendedPersistenceDiagram):
        epds = [epds]
    births = np.array([p.birth for e in epds for p in e.points])
    deaths = np.array([p.death for e in epds for p in e.points])
    if births.size == 0:
        return 0.05
    spread = max(births.max() - births.min(), deaths.max() - deaths.min())
    return 0.05 * spread if spread > 0 else 0.05


def persistence_image(
    epd: ExtendedPersistenceDiagram,
    resolution: tuple[int, int] = (50, 50),
    sigma: float | None = None,
    weight: str = "persistence",
    bounds: tuple[float, float, float, float] | None = None,
    padding: float = 3.0,
) -> PersistenceImage:
    """Integrate one isotropic Gaussian per diagram point over each box
    of a rows x cols grid in the raw (birth, death) plane.

    Auto bounds pad the diagram bounding box by ``padding`` bandwidths;
    fixed ``bounds`` keep a batch of images on one grid.
    """
    rows, cols = int(resolution[0]), int(resolution[1])
    if rows < 1 or cols < 1:
        raise VectorizeError("grid", f"resolution must be at least 1x1, got {resolution}")
    if sigma is None:
        sigma = default_sigma(epd)
    if sigma <= 0:
        raise VectorizeError("sigma", f"sigma must be positive, got {sigma}")
    births = np.array([p.birth for p in epd.points], dtype=np.float64)
    deaths = np.array([p.death for p in epd.points], dtype=np.float64)
    if bounds is None:
        if births.size == 0:
            bounds = (0.0, 1.0, 0.0, 1.0)
        else:
            pad = padding * sigma
            bounds = (
                float(births.min() - pad),
                float(births.max() + pad),
                float(deaths.min() - pad),
                float(deaths.max() + pad),
            )
    b_min, b_max, d_min, d_max = (float(v) for v in bounds)
    if not (b_min < b_max and d_min < d_max) or not all(np.isfinite(bounds)):
        raise VectorizeError("grid", f"degenerate image bounds {bounds}")
    pixels = np.zeros((rows, cols))
    if births.size:
        w = _point_weights(epd, weight)
        x_edges = np.linspace(b_min, b_max, cols + 1)
        y_edges = np.linspace(d_min, d_max, rows + 1)
        # exact per-axis mass: Phi over box edges, differenced
        dx = np.diff(ndtr((x_edges[None, :] - births[:, None]) / sigma), axis=1)
        dy = np.diff(ndtr((y_edges[None, :] - deaths[:, None]) / sigma), axis=1)
        pixels = (dy * w[:, None]).T @ dx
    else:
        _point_weights(epd, weight)  # still validate the weight name
    return PersistenceImage((rows, cols), (b_min, b_max, d_min, d_max), (sigma, sigma), pixels)


## ------------------------------------------------------- batch featurization


@dataclass(frozen=True)
class LandscapePlan:
    t_grid: np.ndarray
    k_max: int

    def __post_init__(self):
        grid = np.ascontiguousarray(np.asarray(self.t_grid, dtype=np.float64))
        grid.flags.writeable = False
        object.__setattr__(self, "t_grid", grid)

    def block_shape(self) -> tuple[int, ...]:
        return (2, self.k_max, int(self.t_grid.shape[0]))


@dataclass(frozen=True)
class ImagePlan:
    bounds: tuple[float, float, float, float]
    sigma: float
    resolution: tuple[int, int]
    weight: str

    def block_shape(self) -> tuple[int, ...]:
        return tuple(self.resolution)


@dataclass(frozen=True)
class FeatureConfig:
    """Frozen per-filtration vectorization plans, in bundle order."""

    summary: str
    functions: tuple[str, ...]
    plans: tuple[LandscapePlan | ImagePlan, ...]

    def __post_init__(self):
        if self.summary not in ("EPL", "EPI"):
            raise ValueError(f"summary must be 'EPL' or 'EPI', got {self.summary!r}")
        if len(self.functions) != len(self.plans):
            raise ValueError("one plan per filtration function required")

    def length(self) -> int:
        return sum(int(np.prod(p.block_shape())) for p in self.plans)


def fit_feature_config(
    diagram_rows: Sequence[Sequence[ExtendedPersistenceDiagram]],
    functions: Sequence[str],
    summary: str = "EPL",
    *,
    k_max: int = 2,
    n_samples: int = 50,
    grid="uniform",
    resolution: tuple[int, int] = (50, 50),
    sigma: float | None = None,
    weight: str = "persistence",
) -> FeatureConfig:
    """Fix shared grids (EPL) or bounds and bandwidth (EPI) per
    filtration from the diagrams of a fitting split.

    ``diagram_rows[i][q]`` is the diagram of graph i under function q,
    in the order of ``functions``.
    """
    functions = tuple(functions)
    for row in diagram_rows:
        if len(row) != len(functions):
            raise ValueError("each diagram row must match the function list")
    plans: list[LandscapePlan | ImagePlan] = []
    for q in range(len(functions)):
        column = [row[q] for row in diagram_rows]
        if summary == "EPL":
            plans.append(LandscapePlan(landscape_grid(column, grid, n_samples), k_max))
        elif summary == "EPI":
            sig = default_sigma(column) if sigma is None else float(sigma)
            if sig <= 0:
                raise VectorizeError("sigma", f"sigma must be positive, got {sig}")
            births = np.array([p.birth for e in column for p in e.points])
            deaths = np.array([p.death for e in column for p in e.points])
            if births.size == 0:
                bounds = (0.0, 1.0, 0.0, 1.0)
            else:
                pad = 3.0 * sig
                bounds = (
                    float(births.min() - pad),
                    float(births.max() + pad),
                    float(deaths.min() - pad),
                    float(deaths.max() + pad),
                )
            plans.append(ImagePlan(bounds, sig, (int(resolution[0]), int(resolution[1])), weight))
        else:
            raise ValueError(f"summary must be 'EPL' or 'EPI', got {summary!r}")
    return FeatureConfig(summary, functions, tuple(plans))


def featurize_diagrams(
    diagrams: Sequence[ExtendedPersistenceDiagram], config: FeatureConfig
) -> FeatureVector:
    """Vectorize precomputed diagrams (one per configured function)."""
    if len(diagrams) != len(config.functions):
        raise ValueError("one diagram per configured function required")
    blocks = []
    layout = []
    for epd, name, plan in zip(diagrams, config.functions, config.plans):
        if isinstance(plan, LandscapePlan):
            ls = landscape(epd, plan.k_max, plan.t_grid)
            block = np.concatenate([ls.pos_levels.ravel(), ls.neg_levels.ravel()])
        else:
            img = persistence_image(
                epd, plan.resolution, plan.sigma, plan.weight, bounds=plan.bounds
            )
            block = img.pixels.ravel()
        blocks.append(block)
        layout.append((name, config.summary, plan.block_shape()))
    return FeatureVector(np.concatenate(blocks) if blocks else np.empty(0), tuple(layout))


def featurize(graph: Graph, config: FeatureConfig) -> FeatureVector:
    """Filtrations, diagrams, and summaries for one graph under a fitted
    config.  Permutation-invariant: relabeling the graph cannot change
    the result because every stage is."""
    bundle = make_bundle(graph, config.functions)
    return featurize_diagrams(epd_bundle(graph, bundle), config)


## ---------------------------------------------------------------- csv + files


def write_feature_csv(path: str | Path, vectors: Sequence[FeatureVector], labels) -> None:
    """One row per graph; header names each coordinate
    function:summary:index, final column is the integer label."""
    labels = list(labels)
    if len(labels) != len(vectors):
        raise ValueError("one label per feature vector required")
    if vectors:
        names = vectors[0].column_names()
        for v in vectors[1:]:
            if v.layout != vectors[0].layout:
                raise ValueError("all feature vectors must share one layout")
    else:
        names = []
    with open(path, "w") as fh:
        fh.write(",".join(names + ["label"]) + "\n")
        for vec, lab in zip(vectors, labels):
            cells = [f"{x:.17g}" for x in vec.values]
            fh.write(",".join(cells + [str(int(lab))]) + "\n")


def read_feature_csv(path: str | Path) -> tuple[list[str], np.ndarray, np.ndarray]:
    """(column names, feature matrix, labels) from the export format."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty feature file")
    header = lines[0].split(",")
    if not header or header[-1] != "label":
        raise ValueError(f"{path}: final column must be 'label'")
    names = header[:-1]
    rows, labels = [], []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(header):
            raise ValueError(f"{path}: row has {len(cells)} cells, header has {len(header)}")
        rows.append([float(c) for c in cells[:-1]])
        labels.append(int(cells[-1]))
    X = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
    return names, X, np.array(labels, dtype=np.int64)


def save_landscape(ls: LandscapeSet, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write(f"k_max {ls.k_max}\n")
        fh.write("t " + " ".join(f"{v:.17g}" for v in ls.t_grid) + "\n")
        for sign, levels in (("pos", ls.pos_levels), ("neg", ls.neg_levels)):
            for k in range(ls.k_max):
                fh.write(f"{sign}{k + 1} " + " ".join(f"{v:.17g}" for v in levels[k]) + "\n")


def load_landscape(path: str | Path) -> LandscapeSet:
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip()]
    try:
        if lines[0][0] != "k_max" or lines[1][0] != "t":
            raise ValueError
        k_max = int(lines[0][1])
        t_grid = np.array([float(v) for v in lines[1][1:]])
        rows = [[float(v) for v in ln[1:]] for ln in lines[2:]]
        tags = [ln[0] for ln in lines[2:]]
        want = [f"pos{k + 1}" for k in range(k_max)] + [f"neg{k + 1}" for k in range(k_max)]
        if tags != want:
            raise ValueError
    except (ValueError, IndexError):
        raise VectorizeError("grid", f"{path}: not a landscape file") from None
    pos = np.array(rows[:k_max]).reshape(k_max, t_grid.size)
    neg = np.array(rows[k_max:]).reshape(k_max, t_grid.size)
    return LandscapeSet(k_max, t_grid, pos, neg)
