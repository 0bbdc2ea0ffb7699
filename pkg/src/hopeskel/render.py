"""Deterministic SVG drawings of skeletons and persistence diagrams."""

from __future__ import annotations

import math

import numpy as np

from .persistence import GapDecomposition, PersistenceDiagram, diagonal_gaps, vertical_gaps
from .skeleton import SkeletonGraph

__all__ = ["skeleton_svg", "diagram_svg"]

EDGE_STYLE = {"tree": "#000000", "critical": "#d62728", "link": "#1f4e9c"}


def _f(x: float) -> str:
    return f"{x:.4f}"


class _Frame:
    """Maps data coordinates into a square canvas with the y axis pointing up."""

    def __init__(self, pts: np.ndarray, size: float, margin: float = 10.0):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            pts = np.zeros((1, 2))
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
        self.lo, self.hi = lo, hi
        self.k = (size - 2 * margin) / span
        self.m = margin
        self.size = size

    def __call__(self, p) -> tuple[float, float]:
        x = self.m + (p[0] - self.lo[0]) * self.k
        y = self.size - self.m - (p[1] - self.lo[1]) * self.k
        return x, y


def _header(size: float) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(size)}" height="{_f(size)}" '
        f'viewBox="0 0 {_f(size)} {_f(size)}">',
        f'<rect x="0" y="0" width="{_f(size)}" height="{_f(size)}" fill="#ffffff"/>',
    ]


def skeleton_svg(g: SkeletonGraph, cloud: np.ndarray | None = None, size: float = 600.0,
                 point_radius: float = 1.2, width: float = 1.5) -> str:
    """Cloud in grey, tree edges in black, critical edges in red, other links in blue."""
    if g.coords is None:
        raise ValueError("cannot draw a graph without coordinates")
    pts = [g.coords] + ([np.asarray(cloud, float)] if cloud is not None else [])
    fr = _Frame(np.vstack(pts), size)
    out = _header(size)
    if cloud is not None:
        out.append('<g fill="#9a9a9a">')
        for p in np.asarray(cloud, float):
            x, y = fr(p)
            out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(point_radius)}"/>')
        out.append("</g>")
    order = {"link": 0, "tree": 1, "critical": 2}
    for e in sorted(g.edges, key=lambda e: (order.get(e.kind, 0), e.key)):
        x1, y1 = fr(g.position(e.u))
        x2, y2 = fr(g.position(e.v))
        out.append(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
                   f'stroke="{EDGE_STYLE.get(e.kind, "#000000")}" stroke-width="{_f(width)}"/>')
    deg = g.degrees()
    out.append('<g fill="#000000">')
    for v in g.ids:
        if deg[int(v)] != 2 or g.provenance not in ("hopes",):
            x, y = fr(g.position(int(v)))
            out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(width)}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def diagram_svg(pd: PersistenceDiagram, gd: GapDecomposition | None = None, size: float = 500.0,
                k: int = 1, l: int = 1) -> str:
    """Dots, the diagonal, the widest diagonal gap (green) and the chosen vertical strip (blue)."""
    dots = pd.points(finite=True)
    top = float(dots.max()) if len(dots) else 1.0
    top = top * 1.05 if top > 0 else 1.0
    fr = _Frame(np.array([[0.0, 0.0], [top, top]]), size, margin=30.0)
    out = _header(size)
    if gd is None and len(dots):
        gd = diagonal_gaps(pd)
    if gd is not None and gd.m:
        g = gd.dgap(k)
        a, b = g.lower, g.upper
        poly = [(0, a), (top - a, top), (top - b, top), (0, b)] if b < top else [(0, a), (top - a, top), (0, top)]
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in (fr(p) for p in poly))
        out.append(f'<polygon points="{pts}" fill="#2ca02c" fill-opacity="0.2"/>')
        split = vertical_gaps(gd, k, l)
        x0, _ = fr((split.vs, 0))
        x1, _ = fr((top, 0))
        _, ytop = fr((0, top))
        _, ybot = fr((0, 0))
        out.append(f'<rect x="{_f(x0)}" y="{_f(ytop)}" width="{_f(x1 - x0)}" height="{_f(ybot - ytop)}" '
                   f'fill="#1f77b4" fill-opacity="0.1"/>')
    x0, y0 = fr((0, 0))
    x1, y1 = fr((top, top))
    out.append(f'<line x1="{_f(x0)}" y1="{_f(y0)}" x2="{_f(x1)}" y2="{_f(y1)}" stroke="#000000" stroke-width="1"/>')
    out.append(f'<line x1="{_f(x0)}" y1="{_f(y0)}" x2="{_f(x0)}" y2="{_f(y1)}" stroke="#000000" stroke-width="1"/>')
    out.append(f'<line x1="{_f(x0)}" y1="{_f(y0)}" x2="{_f(x1)}" y2="{_f(y0)}" stroke="#000000" stroke-width="1"/>')
    out.append('<g fill="#d62728">')
    for b, d, m in pd.dots:
        if not math.isfinite(d):
            continue
        x, y = fr((b, d))
        out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(3.0 + min(m - 1, 4))}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
