"""Deterministic SVG rendering of environment windows.

Conventions follow the figure style of the model: walk-graph edges are
straight segments except trap pairs, drawn as two arcs bowed to either
side inside their cell; source cells get a black circle, trap cells a
black diagonal stroke; source vertices red circles, inward trap
vertices blue circles, outward trap vertices blue crosses. Output is
byte-stable: fixed iteration order and fixed decimal formatting.
"""

from __future__ import annotations

from .env import Environment
from .graph import SOURCE, TRAP, LineCache, Window, classify_cell, classify_vertex
from .midedge import block_lattice, midedge_graph

CELL = 28.0
MARGIN = 20.0


class WindowTooLarge(ValueError):
    pass


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def render_svg(
    env: Environment,
    window: Window,
    *,
    show_cells: bool = True,
    show_vertices: bool = True,
    show_sign_lines: bool = False,
    show_midedge: bool = False,
    trajectory=None,
    max_cells: int = 40_000,
) -> str:
    """Render the walk graph over a half-open window to an SVG string."""
    (x0, x1), (y0, y1) = window
    if (x1 - x0) * (y1 - y0) > max_cells:
        raise WindowTooLarge(f"window has more than {max_cells} cells")
    lines = LineCache(env)
    width = (x1 - 1 - x0) * CELL + 2 * MARGIN
    height = (y1 - 1 - y0) * CELL + 2 * MARGIN

    def px(x: float) -> float:
        return MARGIN + (x - x0) * CELL

    def py(y: float) -> float:
        return MARGIN + (y1 - 1 - y) * CELL

    out: list[str] = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">'
    )
    out.append(
        '<defs><marker id="arr" viewBox="0 0 6 6" refX="5" refY="3" '
        'markerWidth="5" markerHeight="5" orient="auto">'
        '<path d="M0,0 L6,3 L0,6 z" fill="#555"/></marker></defs>'
    )
    out.append(f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="white"/>')

    # faint lattice grid
    for x in range(x0, x1):
        out.append(f'<line x1="{_fmt(px(x))}" y1="{_fmt(py(y0))}" x2="{_fmt(px(x))}" '
                   f'y2="{_fmt(py(y1 - 1))}" stroke="#eee" stroke-width="1"/>')
    for y in range(y0, y1):
        out.append(f'<line x1="{_fmt(px(x0))}" y1="{_fmt(py(y))}" x2="{_fmt(px(x1 - 1))}" '
                   f'y2="{_fmt(py(y))}" stroke="#eee" stroke-width="1"/>')

    if show_sign_lines or show_midedge:
        bl = block_lattice(env, window)
        for vx in bl.v_lines:
            out.append(f'<line x1="{_fmt(px(vx + 0.5))}" y1="{_fmt(py(y0))}" '
                       f'x2="{_fmt(px(vx + 0.5))}" y2="{_fmt(py(y1 - 1))}" '
                       'stroke="#bbb" stroke-width="1" stroke-dasharray="3,3"/>')
        for hy in bl.h_lines:
            out.append(f'<line x1="{_fmt(px(x0))}" y1="{_fmt(py(hy + 0.5))}" '
                       f'x2="{_fmt(px(x1 - 1))}" y2="{_fmt(py(hy + 0.5))}" '
                       'stroke="#bbb" stroke-width="1" stroke-dasharray="3,3"/>')

    # walk-graph edges; trap pairs become two arcs inside their cell
    drawn_traps: set[tuple] = set()
    for x in range(x0, x1):
        for y in range(y0, y1):
            v = (x, y)
            w = lines.step(v)
            if not (x0 <= w[0] < x1 and y0 <= w[1] < y1):
                continue
            if lines.step(w) == v:
                key = (min(v, w), max(v, w))
                if key in drawn_traps:
                    continue
                drawn_traps.add(key)
                a, b = key
                mx, my = (a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0
                # perpendicular offset of the control points
                dx, dy = (b[0] - a[0]) / 2.0, (b[1] - a[1]) / 2.0
                ox, oy = -dy * 0.45, dx * 0.45
                for sgn in (1.0, -1.0):
                    cxp, cyp = px(mx + sgn * ox), py(my + sgn * oy)
                    out.append(
                        f'<path d="M{_fmt(px(a[0]))},{_fmt(py(a[1]))} '
                        f'Q{_fmt(cxp)},{_fmt(cyp)} {_fmt(px(b[0]))},{_fmt(py(b[1]))}" '
                        'fill="none" stroke="#333" stroke-width="1.4"/>'
                    )
            else:
                out.append(
                    f'<line x1="{_fmt(px(x))}" y1="{_fmt(py(y))}" '
                    f'x2="{_fmt(px(w[0]))}" y2="{_fmt(py(w[1]))}" '
                    'stroke="#555" stroke-width="1.2" marker-end="url(#arr)"/>'
                )

    if show_cells:
        for x in range(x0, x1 - 1):
            for y in range(y0, y1 - 1):
                kind = classify_cell(env, (x, y)).kind
                cxp, cyp = px(x + 0.5), py(y + 0.5)
                if kind == SOURCE:
                    out.append(f'<circle cx="{_fmt(cxp)}" cy="{_fmt(cyp)}" r="4.5" '
                               'fill="black" class="cell-source"/>')
                elif kind == TRAP:
                    d = 5.0
                    out.append(f'<line x1="{_fmt(cxp - d)}" y1="{_fmt(cyp + d)}" '
                               f'x2="{_fmt(cxp + d)}" y2="{_fmt(cyp - d)}" '
                               'stroke="black" stroke-width="2.5" class="cell-trap"/>')

    if show_vertices:
        # flags need all four incident cells, so only interior vertices
        for x in range(x0 + 1, x1 - 1):
            for y in range(y0 + 1, y1 - 1):
                flags = classify_vertex(env, (x, y))
                cxp, cyp = px(x), py(y)
                if flags.source_vertex:
                    out.append(f'<circle cx="{_fmt(cxp)}" cy="{_fmt(cyp)}" r="3.5" '
                               'fill="none" stroke="red" stroke-width="1.2" '
                               'class="vertex-source"/>')
                if flags.inward_trap:
                    out.append(f'<circle cx="{_fmt(cxp)}" cy="{_fmt(cyp)}" r="2.5" '
                               'fill="blue" class="vertex-inward"/>')
                if flags.outward_trap:
                    d = 3.0
                    out.append(f'<path d="M{_fmt(cxp - d)},{_fmt(cyp - d)} '
                               f'L{_fmt(cxp + d)},{_fmt(cyp + d)} '
                               f'M{_fmt(cxp - d)},{_fmt(cyp + d)} '
                               f'L{_fmt(cxp + d)},{_fmt(cyp - d)}" '
                               'stroke="blue" stroke-width="1.2" class="vertex-outward"/>')

    if show_midedge:
        meg = midedge_graph(bl)
        for p in meg.vertices:
            cxp, cyp = px(p[0] / 2.0), py(p[1] / 2.0)
            out.append(f'<rect x="{_fmt(cxp - 2.2)}" y="{_fmt(cyp - 2.2)}" width="4.4" '
                       'height="4.4" fill="none" stroke="#090" class="midedge-vertex"/>')
        for p in meg.vertices:
            for q in meg.successors(p):
                out.append(f'<line x1="{_fmt(px(p[0] / 2.0))}" y1="{_fmt(py(p[1] / 2.0))}" '
                           f'x2="{_fmt(px(q[0] / 2.0))}" y2="{_fmt(py(q[1] / 2.0))}" '
                           'stroke="#090" stroke-width="0.8" marker-end="url(#arr)" '
                           'class="midedge-edge"/>')

    if trajectory:
        pts = " ".join(f"{_fmt(px(v[0]))},{_fmt(py(v[1]))}" for v in trajectory)
        out.append(f'<polyline points="{pts}" fill="none" stroke="#e60" '
                   'stroke-width="2.5" opacity="0.7" class="trajectory"/>')

    out.append("</svg>")
    return "\n".join(out) + "\n"
