"""Standalone SVG figures: barcodes, diagrams, 3-D scatters and distance series.

Output is plain text with fixed number formatting so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from ._validation import ValidationError
from .persistence import PersistenceDiagram, barcode_of

__all__ = ["render", "barcode_svg", "diagram_svg", "scatter3_svg", "distance_series_svg",
           "DIM_COLORS", "KINDS"]

KINDS = ("barcode", "diagram", "scatter3", "distance_series")
DIM_COLORS = {0: "#000000", 1: "#d62728", 2: "#1f77b4", 3: "#2ca02c"}

W, H = 480, 360
LEFT, RIGHT, TOP, BOTTOM = 50, 20, 30, 40


def _f(x):
    return f"{x:.3f}"


class _Canvas:
    def __init__(self, title=""):
        self.items = []
        self.title = title

    def line(self, x1, y1, x2, y2, color="#000000", width=1.0, dash=None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
                          f'stroke="{color}" stroke-width="{width:g}"{extra}/>')

    def circle(self, x, y, r=2.5, color="#000000"):
        self.items.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{r:g}" fill="{color}"/>')

    def text(self, x, y, s, size=11, anchor="start"):
        self.items.append(f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" '
                          f'text-anchor="{anchor}">{escape(str(s))}</text>')

    def polyline(self, pts, color="#000000"):
        coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in pts)
        self.items.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                          f'stroke-width="1.5"/>')

    def axes(self, xlabel="", ylabel=""):
        self.line(LEFT, H - BOTTOM, W - RIGHT, H - BOTTOM)
        self.line(LEFT, TOP, LEFT, H - BOTTOM)
        if xlabel:
            self.text((LEFT + W - RIGHT) / 2, H - 8, xlabel, anchor="middle")
        if ylabel:
            self.text(12, (TOP + H - BOTTOM) / 2, ylabel, anchor="middle")

    def svg(self):
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
                f'viewBox="0 0 {W} {H}">')
        body = [head, '<rect width="100%" height="100%" fill="#ffffff"/>']
        if self.title:
            body.append(f'<text x="{W / 2:g}" y="18" font-size="13" text-anchor="middle">'
                        f'{escape(self.title)}</text>')
        return "\n".join(body + self.items + ["</svg>"]) + "\n"


def _scale(lo, hi, a, b):
    span = hi - lo if hi > lo else 1.0
    return lambda v: a + (v - lo) / span * (b - a)


def _ticks(c, lo, hi, sx, axis="x", sy=None):
    for k in range(5):
        v = lo + (hi - lo) * k / 4
        if axis == "x":
            c.line(sx(v), H - BOTTOM, sx(v), H - BOTTOM + 4)
            c.text(sx(v), H - BOTTOM + 15, f"{v:.3g}", size=9, anchor="middle")
        else:
            c.line(LEFT - 4, sy(v), LEFT, sy(v))
            c.text(LEFT - 6, sy(v) + 3, f"{v:.3g}", size=9, anchor="end")


def _empty(c, what):
    c.text(W / 2, H / 2, f"empty {what}", anchor="middle")
    return c.svg()


def barcode_svg(diagram, cap=None, title=""):
    """Bars grouped by dimension, essential bars end in an arrow marker."""
    bars = barcode_of(diagram, cap) if isinstance(diagram, PersistenceDiagram) else list(diagram)
    c = _Canvas(title)
    c.axes("scale")
    if not bars:
        return _empty(c, "barcode")
    hi = max(b.death for b in bars)
    hi = hi if hi > 0 else 1.0
    sx = _scale(0.0, hi, LEFT, W - RIGHT)
    _ticks(c, 0.0, hi, sx)
    step = (H - TOP - BOTTOM) / (len(bars) + 1)
    dims_seen = []
    for k, bar in enumerate(bars):
        y = TOP + step * (k + 1)
        color = DIM_COLORS.get(bar.dim, "#7f7f7f")
        c.line(sx(bar.birth), y, sx(bar.death), y, color, 1.5)
        if bar.essential:
            x = sx(bar.death)
            c.items.append(f'<polygon points="{_f(x)},{_f(y - 3)} {_f(x + 6)},{_f(y)} '
                           f'{_f(x)},{_f(y + 3)}" fill="{color}"/>')
        if bar.dim not in dims_seen:
            dims_seen.append(bar.dim)
            c.text(LEFT - 6, y + 3, f"H{bar.dim}", size=10, anchor="end")
    return c.svg()


def diagram_svg(diagram, cap=None, title=""):
    """Birth-death scatter with the diagonal; essential points drawn at ``cap``."""
    c = _Canvas(title)
    c.axes("birth", "death")
    dims = diagram.dims if isinstance(diagram, PersistenceDiagram) else []
    pts = [(d, b, e) for d in dims for b, e in diagram[d]]
    if not pts:
        return _empty(c, "diagram")
    finite = [e for _, _, e in pts if math.isfinite(e)] + [b for _, b, _ in pts]
    if cap is None:
        cap = 1.05 * max(finite) if max(finite) > 0 else 1.0
    sx = _scale(0.0, cap, LEFT, W - RIGHT)
    sy = _scale(0.0, cap, H - BOTTOM, TOP)
    _ticks(c, 0.0, cap, sx)
    _ticks(c, 0.0, cap, sx, "y", sy)
    c.line(sx(0), sy(0), sx(cap), sy(cap), "#999999", 1.0, dash="4,3")
    for d, b, e in pts:
        c.circle(sx(b), sy(min(e, cap)), 3.0 if math.isinf(e) else 2.5,
                 DIM_COLORS.get(d, "#7f7f7f"))
    return c.svg()


def scatter3_svg(coords, azimuth=-60.0, elevation=30.0, title=""):
    """Orthographic projection of 3-D points; markers only."""
    c = _Canvas(title)
    P = np.asarray(coords, dtype=np.float64)
    if P.size == 0:
        return _empty(c, "point cloud")
    P = P.reshape(P.shape[0], -1)
    if P.shape[0] == 0:
        return _empty(c, "point cloud")
    if P.shape[1] < 3:
        P = np.hstack([P, np.zeros((P.shape[0], 3 - P.shape[1]))])
    P = P[:, :3]
    az, el = math.radians(azimuth), math.radians(elevation)
    right = np.array([math.cos(az), math.sin(az), 0.0])
    up = np.array([-math.sin(el) * math.sin(az), math.sin(el) * math.cos(az), math.cos(el)])
    u, v = P @ right, P @ up
    half = max(np.ptp(u), np.ptp(v)) / 2 or 1.0
    cu, cv = (u.max() + u.min()) / 2, (v.max() + v.min()) / 2
    side = min(W - LEFT - RIGHT, H - TOP - BOTTOM) / 2
    ox, oy = (LEFT + W - RIGHT) / 2, (TOP + H - BOTTOM) / 2
    for a, b in zip(u, v):
        c.circle(ox + (a - cu) / half * side, oy - (b - cv) / half * side, 1.8, "#1f77b4")
    return c.svg()


def distance_series_svg(series, title="", ylabel="bottleneck distance"):
    """One polyline per homology dimension; x is the channel index.

    ``series`` maps a dimension to a sequence of distances (NaN entries are skipped).
    """
    c = _Canvas(title)
    c.axes("channel index", ylabel)
    series = {int(k): np.asarray(v, dtype=np.float64) for k, v in dict(series).items()}
    values = np.concatenate([v[np.isfinite(v)] for v in series.values()]) if series else np.empty(0)
    if values.size == 0:
        return _empty(c, "series")
    n = max(v.size for v in series.values())
    hi = float(values.max()) if values.max() > 0 else 1.0
    sx = _scale(1, max(n, 2), LEFT, W - RIGHT)
    sy = _scale(0.0, hi, H - BOTTOM, TOP)
    _ticks(c, 0.0, hi, sx, "y", sy)
    for i in range(1, n + 1):
        c.text(sx(i), H - BOTTOM + 15, str(i), size=9, anchor="middle")
    for row, (dim, v) in enumerate(sorted(series.items())):
        color = DIM_COLORS.get(dim, "#7f7f7f")
        pts = [(sx(i + 1), sy(y)) for i, y in enumerate(v) if np.isfinite(y)]
        c.polyline(pts, color)
        c.text(W - RIGHT - 30, TOP + 12 * (row + 1), f"H{dim}", size=10)
    return c.svg()


def render(kind, payload, out=None, **kwargs):
    """Render ``payload`` as ``kind`` and write it to ``out`` if given; returns the SVG text."""
    if kind == "barcode":
        text = barcode_svg(payload, **kwargs)
    elif kind == "diagram":
        text = diagram_svg(payload, **kwargs)
    elif kind == "scatter3":
        text = scatter3_svg(payload, **kwargs)
    elif kind == "distance_series":
        text = distance_series_svg(payload, **kwargs)
    else:
        raise ValidationError(f"unknown figure kind {kind!r}; choose from {KINDS}")
    if out is not None:
        Path(out).write_text(text, encoding="utf-8")
    return text
