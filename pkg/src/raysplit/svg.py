"""Minimal SVG 1.1 scene writer for curves, arcs, rays and points."""
from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import quoteattr

import numpy as np

from .geometry import BoundaryArc, BoundaryCurve


@dataclass
class Element:
    kind: str  # curve | arc | polyline | point
    points: np.ndarray
    color: str = "black"
    width: float = 1.0
    label: str = ""
    closed: bool = False


def curve_element(curve: BoundaryCurve, color: str = "black", n: int = 256, label: str = "") -> Element:
    return Element("curve", curve.sample(n), color, 1.5, label, closed=True)


def arc_element(curve: BoundaryCurve, arc: BoundaryArc, color: str = "red", n: int = 128,
                label: str = "", width: float = 4.0) -> Element:
    s = arc.sample(n, closed=True)
    pts = np.array([curve.point_at(float(v)) for v in s])
    return Element("arc", pts, color, width, label)


def polyline_element(points, color: str = "blue", label: str = "", closed: bool = False) -> Element:
    return Element("polyline", np.asarray(points, dtype=float).reshape(-1, 2), color, 1.0, label, closed)


def point_element(p, color: str = "black", label: str = "") -> Element:
    return Element("point", np.asarray(p, dtype=float).reshape(1, 2), color, 1.0, label)


@dataclass
class Canvas:
    size: int = 600
    pad: float = 0.05
    bounds: tuple[float, float, float, float] | None = None
    elements: list[Element] = field(default_factory=list)

    def add(self, *els: Element) -> "Canvas":
        self.elements.extend(els)
        return self

    def render(self) -> str:
        return render_svg(self.elements, self.size, self.pad, self.bounds)


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def render_svg(elements: list[Element], size: int = 600, pad: float = 0.05,
               bounds: tuple[float, float, float, float] | None = None) -> str:
    """SVG document with one ``<g>`` per element, in input order.

    World coordinates map to a square canvas with the y axis pointing up; the
    bounding box of all elements (or ``bounds``) fills it with ``pad`` margin.
    """
    if bounds is None:
        allp = np.vstack([e.points for e in elements]) if elements else np.zeros((1, 2))
        x0, y0 = allp.min(axis=0)
        x1, y1 = allp.max(axis=0)
    else:
        x0, y0, x1, y1 = bounds
    span = max(x1 - x0, y1 - y0, 1e-12)
    scale = size * (1 - 2 * pad) / span
    ox = size / 2 - scale * (x0 + x1) / 2
    oy = size / 2 + scale * (y0 + y1) / 2

    def m(p):
        return ox + scale * p[0], oy - scale * p[1]

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>']
    for i, e in enumerate(elements):
        title = f"<title>{e.label}</title>" if e.label else ""
        cls = quoteattr(e.kind)
        if e.kind == "point":
            x, y = m(e.points[0])
            out.append(f'<g id="e{i}" class={cls}>{title}<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" '
                       f'fill={quoteattr(e.color)}/></g>')
            continue
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in map(m, e.points))
        tag = "polygon" if e.closed else "polyline"
        out.append(f'<g id="e{i}" class={cls}>{title}<{tag} points="{pts}" fill="none" '
                   f'stroke={quoteattr(e.color)} stroke-width="{e.width}"/></g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
