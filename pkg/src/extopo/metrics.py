"""Distances between extended persistence diagrams and landscapes.

All point distances use the sup norm on the (birth, death) plane.
Matching is done per point kind: ordinary and relative points may be
matched to the diagonal (cost half their persistence), essential points
(Ext0 and Ext1) must match a point of the same kind on the other side,
and a cardinality mismatch there is an error rather than a distance.

``stability_trial`` perturbs a vertex function, recomputes diagrams,
and checks that the max landscape gap is bounded by the bottleneck
distance, which in turn is bounded by the sup norm of the perturbation.
The landscape gap is evaluated on the grid of all pairwise midpoints of
the two diagrams' coordinate values; every breakpoint of every level
difference is such a midpoint, so the max over the grid is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import MetricError
from .filtration import VertexFunction
from .graphs import Graph
from .persistence import KINDS, ExtendedPersistenceDiagram, epd_fast
from .vectorization import LandscapeSet, _tent_levels, _side_intervals, _coords

__all__ = [
    "MatchingResult",
    "landscape_distance",
    "bottleneck",
    "bottleneck_matching",
    "wasserstein",
    "wasserstein_matching",
    "diagram_landscape_inf",
    "stability_trial",
]

ESSENTIAL_KINDS = ("Ext0", "Ext1")


@dataclass(frozen=True)
class MatchingResult:
    """Witness for one kind: matched index pairs, None marking the
    diagonal, and the realized cost."""

    cost: float
    pairs: tuple[tuple[int | None, int | None], ...]


## -------------------------------------------------------- landscape distance


def _check_grid(ls: LandscapeSet) -> None:
    if ls.t_grid.size == 0:
        raise MetricError("grid", "landscape has an empty grid")


def _resample(levels: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    if src.shape == dst.shape and np.array_equal(src, dst):
        return levels
    return np.vstack([np.interp(dst, src, row) for row in levels])


def _pad_levels(levels: np.ndarray, k_max: int) -> np.ndarray:
    if levels.shape[0] == k_max:
        return levels
    pad = np.zeros((k_max - levels.shape[0], levels.shape[1]))
    return np.vstack([levels, pad])


def _trapezoid_weights(t: np.ndarray) -> np.ndarray:
    if t.size == 1:
        return np.zeros(1)
    w = np.empty_like(t)
    w[1:-1] = (t[2:] - t[:-2]) / 2.0
    w[0] = (t[1] - t[0]) / 2.0
    w[-1] = (t[-1] - t[-2]) / 2.0
    return w


def landscape_distance(a: LandscapeSet, b: LandscapeSet, p: float = 2.0) -> float:
    """l_p norm of the level-function differences over a shared grid.

    Mismatched grids are merged (each side linearly interpolated onto
    the union, edge values extended); mismatched k_max zero-pads the
    shorter set.  Finite p integrates |difference|^p with trapezoid
    weights; p = inf takes the max over every level and sample.
    """
    _check_grid(a)
    _check_grid(b)
    if not math.isinf(p) and p < 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    grid = np.union1d(a.t_grid, b.t_grid)
    k_max = max(a.k_max, b.k_max)
    diffs = []
    for get in ("pos_levels", "neg_levels"):
        la = _pad_levels(_resample(getattr(a, get), a.t_grid, grid), k_max)
        lb = _pad_levels(_resample(getattr(b, get), b.t_grid, grid), k_max)
        diffs.append(np.abs(la - lb))
    delta = np.vstack(diffs)
    if math.isinf(p):
        return float(delta.max()) if delta.size else 0.0
    w = _trapezoid_weights(grid)
    return float((delta**p @ w).sum() ** (1.0 / p))


## ---------------------------------------------------------------- bottleneck


def _diag_cost(pts: np.ndarray) -> np.ndarray:
    return np.abs(pts[:, 1] - pts[:, 0]) / 2.0


def _pair_cost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.maximum(
        np.abs(a[:, None, 0] - b[None, :, 0]), np.abs(a[:, None, 1] - b[None, :, 1])
    )


def _cost_matrix(a: np.ndarray, b: np.ndarray, essential: bool, kind: str) -> np.ndarray:
    """Square matching costs; ordinary kinds get diagonal slots."""
    n, m = a.shape[0], b.shape[0]
    if essential:
        if n != m:
            raise MetricError(
                "essential_mismatch",
                f"{kind}: {n} vs {m} essential points cannot be matched",
            )
        return _pair_cost(a, b)
    full = np.zeros((n + m, m + n))
    full[:n, :m] = _pair_cost(a, b)
    full[:n, m:] = _diag_cost(a)[:, None]
    full[n:, :m] = _diag_cost(b)[None, :]
    return full


def _perfect_matching(allowed: np.ndarray) -> np.ndarray | None:
    """Row -> column assignment covering every row, or None."""
    size = allowed.shape[0]
    if size == 0:
        return np.empty(0, dtype=np.intp)
    match = maximum_bipartite_matching(csr_matrix(allowed), perm_type="column")
    return None if (match < 0).any() else match


def _kind_pairs(match: np.ndarray, n: int, m: int, essential: bool):
    pairs = []
    for i, j in enumerate(match):
        left = i if (essential or i < n) else None
        right = int(j) if (essential or j < m) else None
        if left is not None or right is not None:
            pairs.append((left, right))
    return tuple(pairs)


def _bottleneck_kind(a: np.ndarray, b: np.ndarray, essential: bool, kind: str) -> MatchingResult:
    cost = _cost_matrix(a, b, essential, kind)
    if cost.size == 0:
        return MatchingResult(0.0, ())
    candidates = np.unique(cost)
    lo_i, hi_i = 0, candidates.size - 1
    # smallest candidate whose threshold graph has a perfect matching;
    # the top candidate always works (complete bipartite graph)
    best = _perfect_matching(cost <= candidates[hi_i])
    while lo_i < hi_i:
        mid = (lo_i + hi_i) // 2
        match = _perfect_matching(cost <= candidates[mid])
        if match is None:
            lo_i = mid + 1
        else:
            best, hi_i = match, mid
    return MatchingResult(
        float(candidates[lo_i]), _kind_pairs(best, a.shape[0], b.shape[0], essential)
    )


def bottleneck_matching(
    a: ExtendedPersistenceDiagram, b: ExtendedPersistenceDiagram
) -> tuple[float, dict[str, MatchingResult]]:
    per_kind = {}
    for kind in KINDS:
        per_kind[kind] = _bottleneck_kind(
            a.by_kind(kind), b.by_kind(kind), kind in ESSENTIAL_KINDS, kind
        )
    return max(r.cost for r in per_kind.values()), per_kind


def bottleneck(a: ExtendedPersistenceDiagram, b: ExtendedPersistenceDiagram) -> float:
    """Max over kinds of the minimax matching cost."""
    return bottleneck_matching(a, b)[0]


## --------------------------------------------------------------- wasserstein


def _wasserstein_kind(
    a: np.ndarray, b: np.ndarray, q: float, essential: bool, kind: str
) -> tuple[float, MatchingResult]:
    cost = _cost_matrix(a, b, essential, kind)
    if cost.size == 0:
        return 0.0, MatchingResult(0.0, ())
    rows, cols = linear_sum_assignment(cost**q)
    total = float((cost[rows, cols] ** q).sum())
    match = np.empty(cost.shape[0], dtype=np.intp)
    match[rows] = cols
    pairs = _kind_pairs(match, a.shape[0], b.shape[0], essential)
    return total, MatchingResult(total ** (1.0 / q), pairs)


def wasserstein_matching(
    a: ExtendedPersistenceDiagram, b: ExtendedPersistenceDiagram, q: float = 1.0
) -> tuple[float, dict[str, MatchingResult]]:
    if not (math.isfinite(q) and q >= 1):
        raise ValueError(f"q must be a finite real >= 1, got {q}")
    total = 0.0
    per_kind = {}
    for kind in KINDS:
        part, result = _wasserstein_kind(
            a.by_kind(kind), b.by_kind(kind), q, kind in ESSENTIAL_KINDS, kind
        )
        total += part
        per_kind[kind] = result
    return total ** (1.0 / q), per_kind


def wasserstein(
    a: ExtendedPersistenceDiagram, b: ExtendedPersistenceDiagram, q: float = 1.0
) -> float:
    """q-th root of the summed per-kind optimal assignment costs."""
    return wasserstein_matching(a, b, q)[0]


## ----------------------------------------------------------------- stability


def _exact_inf_gap(a: ExtendedPersistenceDiagram, b: ExtendedPersistenceDiagram) -> float:
    """Max landscape gap over all levels, exactly.

    Level differences are piecewise linear with every breakpoint at a
    pairwise midpoint (x + y) / 2 of the pooled coordinate values: tent
    onsets at (x + x) / 2, peaks at (birth + death) / 2, and crossings
    of a rising and a falling tent edge at (birth_i + death_j) / 2.
    """
    coords = np.concatenate([_coords(a), _coords(b)])
    if coords.size == 0:
        return 0.0
    grid = np.unique((coords[:, None] + coords[None, :]).ravel() / 2.0)
    gap = 0.0
    for sign in (+1, -1):
        lo_a, hi_a = _side_intervals(a, sign)
        lo_b, hi_b = _side_intervals(b, sign)
        k_max = max(lo_a.shape[0], lo_b.shape[0])
        if k_max == 0:
            continue
        la = _tent_levels(lo_a, hi_a, grid, k_max)
        lb = _tent_levels(lo_b, hi_b, grid, k_max)
        gap = max(gap, float(np.abs(la - lb).max()))
    return gap


def diagram_landscape_inf(
    a: ExtendedPersistenceDiagram, b: ExtendedPersistenceDiagram
) -> float:
    """Sup-norm landscape distance between two diagrams, exact."""
    return _exact_inf_gap(a, b)


def stability_trial(g: Graph, f: VertexFunction, epsilon: float, seed: int) -> dict:
    """Perturb f by a uniform [-epsilon, epsilon] value per vertex and
    compare three quantities on the resulting diagram pair:

      lhs: exact sup-norm landscape distance,
      mid: bottleneck distance,
      rhs: sup norm of the perturbation itself.

    The trial passes when lhs <= mid <= rhs, with slack 1e-9 scaled by
    the value range.  Only function values change, never the graph, so
    essential point counts always agree and matching is well posed.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    rng = np.random.default_rng(seed)
    shift = rng.uniform(-epsilon, epsilon, f.values.shape[0])
    f2 = VertexFunction(f.name, f.values + shift)
    d1 = epd_fast(g, f)
    d2 = epd_fast(g, f2)
    lhs = _exact_inf_gap(d1, d2)
    mid = bottleneck(d1, d2)
    rhs = float(np.abs(shift).max()) if shift.size else 0.0
    pooled = np.concatenate([f.values, f2.values])
    tol = 1e-9 * max(1.0, float(pooled.max() - pooled.min()) if pooled.size else 1.0)
    return {
        "lhs": lhs,
        "mid": mid,
        "rhs": rhs,
        "pass": bool(lhs <= mid + tol and mid <= rhs + tol),
    }
