"""Drawings of the price boxes and the box recursion for three-asset bank models.

The SVG writer is plain text so that coordinates are exact decimals of the
underlying rationals (six places) and tests can parse them back.  Any other
file suffix is rendered with matplotlib.

Element classes: ``box`` (C_t at internal nodes), ``terminal`` (C_T),
``support`` (X_t, dashed, drawn where a node has two or more children) and
``value`` (nonempty V_t at internal nodes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from xml.sax.saxutils import quoteattr

from .engine import RecursionTrace, run_recursion_bank
from .exact import Vector
from .market import MarketModel


class FigureError(ValueError):
    pass


@dataclass(frozen=True)
class Element:
    kind: str            # box | terminal | support | value
    node: str
    t: int
    vertices: tuple[Vector, ...]


STYLE = {
    "box": dict(stroke="#1f4e79", fill="#1f4e79", opacity="0.12", dash=None),
    "terminal": dict(stroke="#9c2a00", fill="#9c2a00", opacity="1", dash=None),
    "support": dict(stroke="#555555", fill="none", opacity="1", dash="6 4"),
    "value": dict(stroke="#c00000", fill="#c00000", opacity="0.35", dash=None),
}


def figure_elements(model: MarketModel, t_range: tuple[int, int] | None = None,
                    trace: RecursionTrace | None = None) -> list[Element]:
    if model.kind != "bank" or model.d != 3:
        raise FigureError("figures need a bank-account model with 3 assets (2-dimensional boxes)")
    tree = model.tree
    lo, hi = t_range if t_range is not None else (0, tree.horizon)
    trace = trace or run_recursion_bank(model)
    out = []
    for t in range(lo, hi + 1):
        for nid in tree.nodes_at(t):
            C = model.price_box(nid)
            if tree.is_leaf(nid):
                out.append(Element("terminal", nid, t, C.vertices))
                continue
            out.append(Element("box", nid, t, C.vertices))
            if len(tree.children(nid)) > 1 and not trace.supports[nid].is_empty:
                out.append(Element("support", nid, t, trace.supports[nid].vertices))
            if not trace.values[nid].is_empty:
                out.append(Element("value", nid, t, trace.values[nid].vertices))
    return out


def _ordered(vertices) -> list[Vector]:
    """Polygon vertices in counter-clockwise order (exact points, float angles)."""
    if len(vertices) <= 2:
        return list(vertices)
    cx = sum(float(v[0]) for v in vertices) / len(vertices)
    cy = sum(float(v[1]) for v in vertices) / len(vertices)
    return sorted(vertices, key=lambda v: math.atan2(float(v[1]) - cy, float(v[0]) - cx))


def decimal(x: Fraction, places: int = 6) -> str:
    """Exact rational rounded half-even to ``places`` decimals."""
    q = round(Fraction(x) * 10 ** places)
    sign = "-" if q < 0 else ""
    q = abs(q)
    return f"{sign}{q // 10 ** places}.{q % 10 ** places:0{places}d}"


def _bounds(elements):
    xs = [v[0] for e in elements for v in e.vertices] + [Fraction(0)]
    ys = [v[1] for e in elements for v in e.vertices] + [Fraction(0)]
    return min(xs), max(xs) + 1, min(ys), max(ys) + 1


def render_svg(elements: list[Element], path, title: str = "") -> None:
    x0, x1, y0, y1 = _bounds(elements)
    pad = Fraction(1)
    w, h = x1 - x0 + 2 * pad, y1 - y0 + 2 * pad
    r = max(w, h) / 80
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="480" height="480" '
        f'viewBox="{decimal(x0 - pad)} {decimal(-y1 - pad)} {decimal(w)} {decimal(h)}">',
    ]
    if title:
        lines.append(f"  <title>{title}</title>")
    lines.append('  <g id="data" transform="scale(1,-1)">')
    lines.append(f'    <line class="axis" x1="{decimal(x0)}" y1="0.000000" x2="{decimal(x1)}" y2="0.000000" '
                 'stroke="black" stroke-width="1" vector-effect="non-scaling-stroke"/>')
    lines.append(f'    <line class="axis" x1="0.000000" y1="{decimal(y0)}" x2="0.000000" y2="{decimal(y1)}" '
                 'stroke="black" stroke-width="1" vector-effect="non-scaling-stroke"/>')
    for e in elements:
        st = STYLE[e.kind]
        common = (f'class="{e.kind}" data-node={quoteattr(e.node)} data-t="{e.t}" stroke="{st["stroke"]}" '
                  'stroke-width="2" vector-effect="non-scaling-stroke"')
        if st["dash"]:
            common += f' stroke-dasharray="{st["dash"]}"'
        vs = _ordered(e.vertices)
        if len(vs) == 1:
            (px, py), = vs
            lines.append(f'    <circle {common} cx="{decimal(px)}" cy="{decimal(py)}" r="{decimal(r)}" fill="{st["stroke"]}"/>')
        elif len(vs) == 2:
            (ax, ay), (bx, by) = vs
            lines.append(f'    <line {common} x1="{decimal(ax)}" y1="{decimal(ay)}" x2="{decimal(bx)}" y2="{decimal(by)}"/>')
        else:
            pts = " ".join(f"{decimal(px)},{decimal(py)}" for px, py in vs)
            lines.append(f'    <polygon {common} points="{pts}" fill="{st["fill"]}" fill-opacity="{st["opacity"]}"/>')
    lines.append("  </g>")
    size = decimal(max(w, h) / 40)
    for k in range(math.floor(x0), math.ceil(x1) + 1):
        lines.append(f'  <text class="tick" x="{k}" y="{decimal(pad / 2)}" font-size="{size}" text-anchor="middle">{k}</text>')
    for k in range(math.floor(y0) + 1, math.ceil(y1) + 1):
        lines.append(f'  <text class="tick" x="{decimal(-pad / 2)}" y="{-k}" font-size="{size}" text-anchor="end">{k}</text>')
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n")


def render_matplotlib(elements: list[Element], path, title: str = "") -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.patches import Polygon as Patch

    fig, ax = plt.subplots(figsize=(5, 5))
    for e in elements:
        st = STYLE[e.kind]
        vs = [(float(a), float(b)) for a, b in _ordered(e.vertices)]
        ls = "--" if st["dash"] else "-"
        if len(vs) == 1:
            ax.plot(*vs[0], "o", color=st["stroke"])
        elif len(vs) == 2:
            ax.plot([vs[0][0], vs[1][0]], [vs[0][1], vs[1][1]], ls, color=st["stroke"], lw=2)
        else:
            fill = st["fill"] != "none"
            ax.add_patch(Patch(vs, closed=True, fill=fill, facecolor=st["fill"] if fill else None,
                               alpha=float(st["opacity"]) if fill else 1, edgecolor=st["stroke"], ls=ls))
            ax.add_patch(Patch(vs, closed=True, fill=False, edgecolor=st["stroke"], ls=ls))
    x0, x1, y0, y1 = (float(b) for b in _bounds(elements))
    ax.set_xlim(x0 - 0.5, x1)
    ax.set_ylim(y0 - 0.5, y1)
    ax.set_aspect("equal")
    ax.grid(True, lw=0.3)
    if title:
        ax.set_title(title)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def write_figure(model: MarketModel, path, t_range=None, title: str = "") -> list[Element]:
    elements = figure_elements(model, t_range)
    if Path(path).suffix.lower() == ".svg":
        render_svg(elements, path, title)
    else:
        render_matplotlib(elements, path, title)
    return elements
