"""Static SVG renderings of diagrams and landscape sets.

Everything here is plain string assembly: same input object, same
bytes out.  No timestamps, no random identifiers, no external assets.
"""

from __future__ import annotations

import numpy as np

from .persistence import ExtendedPersistenceDiagram
from .vectorization import LandscapeSet

__all__ = ["diagram_svg", "landscape_svg"]

_WIDTH = 480
_HEIGHT = 480
_MARGIN = 56

## One fixed marker shape and color per point kind, in a fixed legend order.
_KIND_STYLE = (
    ("Ord0", "circle", "#1f77b4"),
    ("Ext0", "square", "#2ca02c"),
    ("Ext1", "diamond", "#d62728"),
    ("Rel1", "triangle", "#9467bd"),
)

_LEVEL_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def _fmt(v: float) -> str:
    out = f"{v:.6g}"
    return "0" if out == "-0" else out


class _Frame:
    """Affine map from data coordinates to the SVG pixel frame."""

    def __init__(self, x_lo: float, x_hi: float, y_lo: float, y_hi: float):
        if x_hi <= x_lo:
            x_lo, x_hi = x_lo - 0.5, x_lo + 0.5
        if y_hi <= y_lo:
            y_lo, y_hi = y_lo - 0.5, y_lo + 0.5
        pad_x = 0.05 * (x_hi - x_lo)
        pad_y = 0.05 * (y_hi - y_lo)
        self.x_lo, self.x_hi = x_lo - pad_x, x_hi + pad_x
        self.y_lo, self.y_hi = y_lo - pad_y, y_hi + pad_y
        self.inner_w = _WIDTH - 2 * _MARGIN
        self.inner_h = _HEIGHT - 2 * _MARGIN

    def x(self, v: float) -> float:
        return _MARGIN + (v - self.x_lo) / (self.x_hi - self.x_lo) * self.inner_w

    def y(self, v: float) -> float:
        return _HEIGHT - _MARGIN - (v - self.y_lo) / (self.y_hi - self.y_lo) * self.inner_h


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="#ffffff"/>',
        f'<text x="{_WIDTH / 2:g}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
    ]


def _axes(fr: _Frame, x_label: str, y_label: str) -> list[str]:
    x0, x1 = _MARGIN, _WIDTH - _MARGIN
    y0, y1 = _HEIGHT - _MARGIN, _MARGIN
    parts = [
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="#000000"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="#000000"/>',
    ]
    for v, anchor in ((fr.x_lo, "start"), (fr.x_hi, "end")):
        parts.append(
            f'<text x="{_fmt(fr.x(v))}" y="{y0 + 18}" text-anchor="{anchor}" '
            f'font-family="sans-serif" font-size="11">{_fmt(v)}</text>'
        )
    for v in (fr.y_lo, fr.y_hi):
        parts.append(
            f'<text x="{x0 - 6}" y="{_fmt(fr.y(v) + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(v)}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) / 2:g}" y="{_HEIGHT - 14}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{x_label}</text>'
    )
    parts.append(
        f'<text x="16" y="{(y0 + y1) / 2:g}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {(y0 + y1) / 2:g})">{y_label}</text>'
    )
    return parts


def _marker(shape: str, cx: float, cy: float, color: str, r: float = 4.5) -> str:
    x, y = _fmt(cx), _fmt(cy)
    if shape == "circle":
        return f'<circle class="pt" cx="{x}" cy="{y}" r="{_fmt(r)}" fill="{color}"/>'
    if shape == "square":
        return (
            f'<rect class="pt" x="{_fmt(cx - r)}" y="{_fmt(cy - r)}" '
            f'width="{_fmt(2 * r)}" height="{_fmt(2 * r)}" fill="{color}"/>'
        )
    if shape == "diamond":
        pts = f"{_fmt(cx)},{_fmt(cy - r)} {_fmt(cx + r)},{_fmt(cy)} {_fmt(cx)},{_fmt(cy + r)} {_fmt(cx - r)},{_fmt(cy)}"
    else:  # triangle
        pts = f"{_fmt(cx)},{_fmt(cy - r)} {_fmt(cx + r)},{_fmt(cy + r)} {_fmt(cx - r)},{_fmt(cy + r)}"
    return f'<polygon class="pt" points="{pts}" fill="{color}"/>'


def diagram_svg(epd: ExtendedPersistenceDiagram) -> str:
    """Scatter plot of a diagram with kind-coded markers and the diagonal.

    Zero-persistence points sit exactly on the diagonal and are skipped;
    they carry no visible information at plot scale.
    """
    drawn = [p for p in epd.points if p.birth != p.death]
    coords = np.array([[p.birth, p.death] for p in drawn], dtype=np.float64)
    if coords.size:
        lo = float(coords.min())
        hi = float(coords.max())
    else:
        lo, hi = 0.0, 1.0
    fr = _Frame(lo, hi, lo, hi)

    parts = _header(f"extended persistence: {epd.function_name}")
    parts += _axes(fr, "birth", "death")
    parts.append(
        f'<line x1="{_fmt(fr.x(fr.x_lo))}" y1="{_fmt(fr.y(fr.x_lo))}" '
        f'x2="{_fmt(fr.x(fr.x_hi))}" y2="{_fmt(fr.y(fr.x_hi))}" '
        f'stroke="#999999" stroke-dasharray="5,4"/>'
    )
    shape_of = {kind: (shape, color) for kind, shape, color in _KIND_STYLE}
    for p in drawn:
        shape, color = shape_of[p.kind]
        parts.append(_marker(shape, fr.x(p.birth), fr.y(p.death), color))
    present = {p.kind for p in drawn}
    ly = _MARGIN + 4
    for kind, shape, color in _KIND_STYLE:
        if kind not in present:
            continue
        parts.append(_marker(shape, _MARGIN + 14, ly, color, r=4.0))
        parts.append(
            f'<text x="{_MARGIN + 24}" y="{ly + 4}" font-family="sans-serif" '
            f'font-size="11">{kind}</text>'
        )
        ly += 16
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def landscape_svg(ls: LandscapeSet) -> str:
    """Stacked polylines: one per level, positive-side solid and
    negative-side dashed, sharing the time axis and a zero line."""
    t = ls.t_grid
    lo_v = float(min(ls.neg_levels.min(), 0.0))
    hi_v = float(max(ls.pos_levels.max(), 0.0))
    fr = _Frame(float(t[0]), float(t[-1]), lo_v, hi_v)

    parts = _header(f"extended persistence landscape, {ls.k_max} levels")
    parts += _axes(fr, "filtration value", "landscape value")
    y0 = fr.y(0.0)
    parts.append(
        f'<line x1="{_MARGIN}" y1="{_fmt(y0)}" x2="{_WIDTH - _MARGIN}" y2="{_fmt(y0)}" '
        f'stroke="#999999" stroke-dasharray="5,4"/>'
    )
    for side, levels, dash in (("pos", ls.pos_levels, ""), ("neg", ls.neg_levels, ' stroke-dasharray="3,3"')):
        for k in range(ls.k_max):
            color = _LEVEL_COLORS[k % len(_LEVEL_COLORS)]
            pts = " ".join(f"{_fmt(fr.x(tv))},{_fmt(fr.y(lv))}" for tv, lv in zip(t, levels[k]))
            parts.append(
                f'<polyline class="lvl-{side}" points="{pts}" fill="none" '
                f'stroke="{color}" stroke-width="1.5"{dash}/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
