"""Extended persistence of vertex-filtered graphs.

The ascending sweep grows sublevel sets of the vertex function; the
descending sweep then grows superlevel sets, treated relative to the
full graph.  Every homology class dies, and each point is tagged with
one of four kinds:

* ``Ord0``   component born at a vertex minimum, absorbed at an edge in
  the ascending sweep (birth <= death);
* ``Ext0``   one point per connected component: (component minimum,
  component maximum);
* ``Ext1``   one point per independent cycle: the value closing the
  cycle ascending paired with the value closing it descending
  (death <= birth);
* ``Rel1``   downward branch pairs from the descending sweep
  (death <= birth).

Zero-persistence points are retained.  Two engines are provided: a fast
union-find implementation (``epd_fast``) and a boundary-matrix reduction
over Z2 on the coned complex (``epd_reduction_oracle``).  They share the
tie-break convention below and must agree exactly:

* vertices are ordered ascending by (value, id); the descending order is
  the exact reverse;
* an edge enters the ascending sweep at the larger endpoint value,
  ordered by (value, larger endpoint id, smaller endpoint id), after all
  vertices of the same value; the descending sweep mirrors this with the
  smaller endpoint value and reversed comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._kernels import (
    _ascending_sweep,
    _descending_sweep,
    _pair_cycles,
)
from .errors import PersistenceError
from .filtration import FiltrationBundle, VertexFunction
from .graphs import Graph

__all__ = [
    "KINDS",
    "EPDPoint",
    "ExtendedPersistenceDiagram",
    "epd_fast",
    "epd_reduction_oracle",
    "epd_bundle",
    "save_diagram",
    "load_diagram",
]

KINDS = ("Ord0", "Ext0", "Ext1", "Rel1")
_KIND_INDEX = {k: i for i, k in enumerate(KINDS)}


@dataclass(frozen=True)
class EPDPoint:
    birth: float
    death: float
    kind: str

    def __post_init__(self):
        if self.kind not in _KIND_INDEX:
            raise PersistenceError("shape", f"unknown point kind {self.kind!r}")
        b, d = float(self.birth), float(self.death)
        if not (math.isfinite(b) and math.isfinite(d)):
            raise PersistenceError("shape", "birth and death must be finite")
        object.__setattr__(self, "birth", b)
        object.__setattr__(self, "death", d)

    @property
    def persistence(self) -> float:
        return abs(self.death - self.birth)


def _sort_key(p: EPDPoint):
    return (_KIND_INDEX[p.kind], p.birth, p.death)


@dataclass(frozen=True)
class ExtendedPersistenceDiagram:
    """Multiset of (birth, death, kind) points for one vertex function.

    Points are stored sorted by (kind, birth, death), so dataclass
    equality is multiset equality.
    """

    function_name: str
    points: tuple[EPDPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(sorted(self.points, key=_sort_key)))

    def __len__(self) -> int:
        return len(self.points)

    def by_kind(self, kind: str) -> np.ndarray:
        """(k, 2) array of (birth, death) for one kind."""
        if kind not in _KIND_INDEX:
            raise PersistenceError("shape", f"unknown point kind {kind!r}")
        rows = [(p.birth, p.death) for p in self.points if p.kind == kind]
        return np.array(rows, dtype=np.float64).reshape(-1, 2)

    def counts(self) -> dict[str, int]:
        out = {k: 0 for k in KINDS}
        for p in self.points:
            out[p.kind] += 1
        return out


## ------------------------------------------------------------ cell orders


def _check_input(graph: Graph, func: VertexFunction) -> np.ndarray:
    values = np.asarray(func.values, dtype=np.float64)
    if values.shape != (graph.num_vertices,):
        raise PersistenceError(
            "shape",
            f"function {func.name!r} has {values.size} values for "
            f"{graph.num_vertices} vertices",
        )
    return values


def _vertex_order(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending (value, id) order: returns (vorder, rank) with
    vorder[r] = vertex at rank r and rank[v] = position of v."""
    n = values.shape[0]
    vorder = np.lexsort((np.arange(n), values))
    rank = np.empty(n, dtype=np.int64)
    rank[vorder] = np.arange(n)
    return vorder.astype(np.int64), rank


def _edge_orders(values: np.ndarray, edges: np.ndarray):
    """Sorted edge positions for both sweeps.

    Ascending: by (max endpoint value, larger id, smaller id), all
    ascending.  Descending: by (min endpoint value, larger id, smaller
    id), all descending.  Returns (asc_pos, asc_val, desc_pos, desc_val)
    where *_pos index into ``edges``.
    """
    if edges.size == 0:
        empty_i = np.empty(0, dtype=np.int64)
        empty_f = np.empty(0, dtype=np.float64)
        return empty_i, empty_f, empty_i, empty_f
    lo_id = edges.min(axis=1)
    hi_id = edges.max(axis=1)
    asc_val = np.maximum(values[edges[:, 0]], values[edges[:, 1]])
    desc_val = np.minimum(values[edges[:, 0]], values[edges[:, 1]])
    asc_pos = np.lexsort((lo_id, hi_id, asc_val)).astype(np.int64)
    desc_pos = np.lexsort((-lo_id, -hi_id, -desc_val)).astype(np.int64)
    return asc_pos, asc_val, desc_pos, desc_val


## ------------------------------------------------------------- fast engine


def epd_fast(graph: Graph, func: VertexFunction) -> ExtendedPersistenceDiagram:
    """Extended persistence via union-find sweeps.

    Ord0, Ext0 and Rel1 come straight from the two merge passes.  Ext1 is
    paired over cycle coordinates (one slot per ascending non-tree edge):
    each descending non-tree edge takes the smallest achievable maximum
    slot over cycles it closes among the edges already swept, which a
    bottleneck spanning forest answers in near-linear time.  That minimum
    over new cycles of the largest coordinate is exactly the pivot a
    left-to-right column reduction of the cycle matrix would assign, so
    the pairing matches the reduction oracle.
    """
    values = _check_input(graph, func)
    n = graph.num_vertices
    edges = graph.edges
    points: list[EPDPoint] = []
    if n == 0:
        return ExtendedPersistenceDiagram(func.name, ())

    vorder, rank = _vertex_order(values)
    asc_pos, asc_val, desc_pos, desc_val = _edge_orders(values, edges)
    eu_a = edges[asc_pos, 0] if edges.size else np.empty(0, dtype=np.int64)
    ev_a = edges[asc_pos, 1] if edges.size else np.empty(0, dtype=np.int64)

    ord_birth, ord_edge, n_ord, asc_cycle, cmin, cmax, n_comp = _ascending_sweep(
        eu_a, ev_a, rank, vorder, n
    )
    if n_ord:
        births = values[ord_birth[:n_ord]].tolist()
        deaths = asc_val[asc_pos[ord_edge[:n_ord]]].tolist()
        points += [EPDPoint(b, d, "Ord0") for b, d in zip(births, deaths)]
    if n_comp:
        births = values[cmin[:n_comp]].tolist()
        deaths = values[cmax[:n_comp]].tolist()
        points += [EPDPoint(b, d, "Ext0") for b, d in zip(births, deaths)]

    eu_d = edges[desc_pos, 0] if edges.size else np.empty(0, dtype=np.int64)
    ev_d = edges[desc_pos, 1] if edges.size else np.empty(0, dtype=np.int64)
    rel_birth, rel_edge, n_rel, desc_cycle = _descending_sweep(eu_d, ev_d, rank, n)
    if n_rel:
        births = values[rel_birth[:n_rel]].tolist()
        deaths = desc_val[desc_pos[rel_edge[:n_rel]]].tolist()
        points += [EPDPoint(b, d, "Rel1") for b, d in zip(births, deaths)]

    ## Ext1: cycle pairing
    n_cycles = int(asc_cycle.sum())
    if n_cycles:
        ## slot r = r-th ascending cycle edge; slot_of[edge position in
        ## the original edge array] = its slot or -1
        slot_of = np.full(edges.shape[0], -1, dtype=np.int64)
        asc_cycle_positions = asc_pos[np.flatnonzero(asc_cycle)]
        slot_of[asc_cycle_positions] = np.arange(n_cycles)

        tpos = desc_pos[np.flatnonzero(~desc_cycle)]
        cpos = desc_pos[np.flatnonzero(desc_cycle)]
        lows = _pair_cycles(
            n,
            edges[tpos, 0],
            edges[tpos, 1],
            slot_of[tpos],
            edges[cpos, 0],
            edges[cpos, 1],
            slot_of[cpos],
        )
        ## the fundamental cycles form a basis, so the pairing is a
        ## bijection onto the slots
        if lows.size and (lows.min() < 0 or np.unique(lows).size != n_cycles):
            raise PersistenceError("shape", "cycle pairing is not a bijection")
        births = asc_val[asc_cycle_positions][lows].tolist()
        deaths = desc_val[cpos].tolist()
        points += [EPDPoint(b, d, "Ext1") for b, d in zip(births, deaths)]
    return ExtendedPersistenceDiagram(func.name, tuple(points))


## --------------------------------------------------------- reduction oracle


def epd_reduction_oracle(
    graph: Graph, func: VertexFunction, max_vertices: int = 2000
) -> ExtendedPersistenceDiagram:
    """Extended persistence by explicit boundary-matrix reduction.

    Builds the coned filtration: the cone apex first, the graph's cells
    in ascending order, then a coned copy of every cell in descending
    order (coned vertices as edges to the apex, coned edges as
    triangles).  Columns are reduced left to right over Z2 with
    lowest-one pivots; pairs classify by which halves the two cells lie
    in.  Deliberately simple; quadratic-at-best and capped.
    """
    values = _check_input(graph, func)
    n = graph.num_vertices
    if n > max_vertices:
        raise PersistenceError(
            "too_large", f"{n} vertices exceeds the oracle cap of {max_vertices}"
        )
    if n == 0:
        return ExtendedPersistenceDiagram(func.name, ())
    edges = graph.edges
    m = edges.shape[0]

    vorder, rank = _vertex_order(values)
    asc_pos, asc_val, desc_pos, desc_val = _edge_orders(values, edges)

    ## global cell order; each entry: (type, payload) with type in
    ## {apex, vertex, edge, coned_vertex, coned_edge}
    cells: list[tuple[str, int]] = [("apex", -1)]
    asc_value_of_vertexcell: dict[int, float] = {}
    ## ascending half: vertices and edges interleaved by (value, dim, ids)
    asc_items: list[tuple[tuple, str, int]] = []
    for v in range(n):
        asc_items.append(((values[v], 0, v, -1), "vertex", v))
    for pos in range(m):
        u, v = int(edges[pos, 0]), int(edges[pos, 1])
        key = (float(asc_val[pos]), 1, max(u, v), min(u, v))
        asc_items.append((key, "edge", pos))
    asc_items.sort(key=lambda item: item[0])
    cells.extend((t, p) for _, t, p in asc_items)

    ## descending half: coned copies, reverse-mirrored order
    desc_items: list[tuple[tuple, str, int]] = []
    for v in range(n):
        desc_items.append(((-values[v], 0, -v, 1), "coned_vertex", v))
    for pos in range(m):
        u, v = int(edges[pos, 0]), int(edges[pos, 1])
        key = (-float(desc_val[pos]), 1, -max(u, v), -min(u, v))
        desc_items.append((key, "coned_edge", pos))
    desc_items.sort(key=lambda item: item[0])
    cells.extend((t, p) for _, t, p in desc_items)

    row_of_vertex = {}
    row_of_edge = {}
    row_of_coned_vertex = {}
    for row, (t, p) in enumerate(cells):
        if t == "vertex":
            row_of_vertex[p] = row
        elif t == "edge":
            row_of_edge[p] = row
        elif t == "coned_vertex":
            row_of_coned_vertex[p] = row

    def boundary(t: str, p: int) -> int:
        if t in ("apex", "vertex"):
            return 0
        if t == "edge":
            u, v = int(edges[p, 0]), int(edges[p, 1])
            return (1 << row_of_vertex[u]) | (1 << row_of_vertex[v])
        if t == "coned_vertex":
            return 1 | (1 << row_of_vertex[p])  # apex is row 0
        u, v = int(edges[p, 0]), int(edges[p, 1])
        return (
            (1 << row_of_edge[p])
            | (1 << row_of_coned_vertex[u])
            | (1 << row_of_coned_vertex[v])
        )

    def cell_value(t: str, p: int) -> float:
        if t == "vertex" or t == "coned_vertex":
            return float(values[p])
        if t == "edge":
            return float(asc_val[p])
        return float(desc_val[p])

    columns: dict[int, tuple[int, int]] = {}  # low row -> (column bits, column index)
    pair_of_row: dict[int, int] = {}
    for j, (t, p) in enumerate(cells):
        col = boundary(t, p)
        low = col.bit_length() - 1
        while low >= 0 and low in columns:
            col ^= columns[low][0]
            low = col.bit_length() - 1
        if low >= 0:
            columns[low] = (col, j)
            pair_of_row[low] = j

    points: list[EPDPoint] = []
    paired_rows = set(pair_of_row)
    paired_cols = set(pair_of_row.values())
    for row, j in sorted(pair_of_row.items()):
        bt, bp = cells[row]
        dt, dp = cells[j]
        birth, death = cell_value(bt, bp), cell_value(dt, dp)
        if bt == "vertex" and dt == "edge":
            points.append(EPDPoint(birth, death, "Ord0"))
        elif bt == "vertex" and dt == "coned_vertex":
            points.append(EPDPoint(birth, death, "Ext0"))
        elif bt == "edge" and dt == "coned_edge":
            points.append(EPDPoint(birth, death, "Ext1"))
        elif bt == "coned_vertex" and dt == "coned_edge":
            points.append(EPDPoint(birth, death, "Rel1"))
        else:
            raise PersistenceError("shape", f"unexpected pair {bt}->{dt}")
    ## the one essential class is the contractible cone itself
    for row, (t, p) in enumerate(cells):
        if row in paired_rows or row in paired_cols:
            continue
        if t != "apex":
            raise PersistenceError("shape", f"unpaired non-apex cell {t}")
    return ExtendedPersistenceDiagram(func.name, tuple(points))


## ------------------------------------------------------------------ bundles


def epd_bundle(graph: Graph, bundle: FiltrationBundle) -> tuple[ExtendedPersistenceDiagram, ...]:
    """One diagram per bundle function, in bundle order."""
    return tuple(epd_fast(graph, f) for f in bundle)


## -------------------------------------------------------------- file format


def save_diagram(epd: ExtendedPersistenceDiagram, path: str | Path) -> None:
    """One line per point: ``kind birth death`` with %.9g reals."""
    with open(path, "w") as fh:
        fh.write(f"# function {epd.function_name}\n")
        for p in epd.points:
            fh.write(f"{p.kind} {p.birth:.9g} {p.death:.9g}\n")


def load_diagram(path: str | Path) -> ExtendedPersistenceDiagram:
    name = Path(path).stem
    points = []
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "function":
                    name = parts[1]
                continue
            parts = line.split()
            if len(parts) != 3 or parts[0] not in _KIND_INDEX:
                raise PersistenceError("shape", f"{path}:{lineno}: bad diagram line")
            points.append(EPDPoint(float(parts[1]), float(parts[2]), parts[0]))
    return ExtendedPersistenceDiagram(name, tuple(points))
