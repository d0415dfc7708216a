"""Block lattice of sign-change lines and the directed mid-edge graph.

Sign-change lines sit between consecutive lines of opposite orientation;
their intersections are exactly the source and trap cells, alternating
in a checkered pattern. Between the lines lie blocks of constant
orientation (u, v). A walk inside a block moves along one diagonal, so
each block-boundary edge is crossable in only one direction; connecting
entry-side midpoints to exit-side midpoints across every block gives a
directed graph on the midpoints in which every interior vertex has two
successors. Any closed walk maps to the sequence of midpoints of the
edges it crosses; simple planar such cycles always enclose exactly one
more source than traps.

All geometry here uses doubled integer coordinates (real value times 2)
so midpoints and half-integer line positions stay exact.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Sequence

from .env import Environment
from .graph import SOURCE, TRAP, Window, classify_cell

Point = tuple[int, int]  # doubled coordinates


@dataclass(frozen=True)
class BlockLattice:
    """Sign-change structure of a finite window.

    ``v_lines[i]`` is the integer x with V_x != V_{x+1} (the line lives
    at x + 1/2); ``v_bands[i]`` the constant V value of the i-th column
    band, with one more band than lines. Same for h_lines / h_bands
    along y. ``kinds`` classifies every line intersection.
    """

    window: Window
    v_lines: tuple[int, ...]
    h_lines: tuple[int, ...]
    v_bands: tuple[int, ...]
    h_bands: tuple[int, ...]
    kinds: dict[tuple[int, int], str]

    @property
    def v_delims(self) -> tuple[int, ...]:
        (x0, x1), _ = self.window
        return (2 * x0 - 1, *(2 * x + 1 for x in self.v_lines), 2 * x1 - 1)

    @property
    def h_delims(self) -> tuple[int, ...]:
        _, (y0, y1) = self.window
        return (2 * y0 - 1, *(2 * y + 1 for y in self.h_lines), 2 * y1 - 1)

    def vertex_points(self) -> dict[Point, str]:
        """Block-lattice vertices in doubled coordinates."""
        return {(2 * vx + 1, 2 * hy + 1): k for (vx, hy), k in self.kinds.items()}


def block_lattice(env: Environment, window: Window) -> BlockLattice:
    if env.dimension != 2:
        raise ValueError("block lattice is 2D")
    (x0, x1), (y0, y1) = window
    if x1 - x0 < 2 or y1 - y0 < 2:
        raise ValueError("window too small for any sign change")
    v_lines = tuple(x for x in range(x0, x1 - 1) if env.v(x) != env.v(x + 1))
    h_lines = tuple(y for y in range(y0, y1 - 1) if env.u(y) != env.u(y + 1))
    v_bands = (env.v(x0), *(env.v(x + 1) for x in v_lines))
    h_bands = (env.u(y0), *(env.u(y + 1) for y in h_lines))
    kinds = {}
    for i, vx in enumerate(v_lines):
        for j, hy in enumerate(h_lines):
            kinds[(vx, hy)] = TRAP if h_bands[j] == v_bands[i] else SOURCE
    return BlockLattice(
        window=window,
        v_lines=v_lines,
        h_lines=h_lines,
        v_bands=v_bands,
        h_bands=h_bands,
        kinds=kinds,
    )


@dataclass(frozen=True)
class MidEdgeGraph:
    """Directed graph on block-edge midpoints (doubled coordinates)."""

    vertices: tuple[Point, ...]
    out: dict[Point, tuple[Point, ...]]
    interior: frozenset[Point]

    def successors(self, p: Point) -> tuple[Point, ...]:
        return self.out.get(p, ())


def midedge_graph(bl: BlockLattice) -> MidEdgeGraph:
    """Connect entry-side to exit-side midpoints across every block.

    A vertical block edge is crossed only in the direction of u, a
    horizontal one only in the direction of v, so a block of orientation
    (u, v) is entered through its left-or-right and bottom-or-top sides
    accordingly and left through the opposite ones.
    """
    vd = bl.v_delims
    hd = bl.h_delims
    nv = len(vd) - 1
    nh = len(hd) - 1
    out: dict[Point, list[Point]] = {}
    vertices: set[Point] = set()
    interior: set[Point] = set()

    for i in range(nv):
        for j in range(nh):
            u = bl.h_bands[j]
            v = bl.v_bands[i]
            mid_y = (hd[j] + hd[j + 1]) // 2
            mid_x = (vd[i] + vd[i + 1]) // 2
            left = (vd[i], mid_y) if i > 0 else None
            right = (vd[i + 1], mid_y) if i + 1 < nv else None
            bottom = (mid_x, hd[j]) if j > 0 else None
            top = (mid_x, hd[j + 1]) if j + 1 < nh else None
            for p in (left, right, bottom, top):
                if p is not None:
                    vertices.add(p)
            entries = [left if u == 1 else right, bottom if v == 1 else top]
            exits = [right if u == 1 else left, top if v == 1 else bottom]
            for p in entries:
                if p is None:
                    continue
                for q in exits:
                    if q is None:
                        continue
                    out.setdefault(p, []).append(q)

    indeg: dict[Point, int] = {}
    for succ in out.values():
        for q in succ:
            indeg[q] = indeg.get(q, 0) + 1
    interior = {p for p in vertices if len(out.get(p, ())) == 2 and indeg.get(p, 0) == 2}
    return MidEdgeGraph(
        vertices=tuple(sorted(vertices)),
        out={p: tuple(sorted(q)) for p, q in out.items()},
        interior=frozenset(interior),
    )


@dataclass(frozen=True)
class MidEdgeCycle:
    vertices: tuple[Point, ...]
    simple: bool
    planar_embedding_ok: bool
    s: int | None = None
    t: int | None = None


class CycleGeometryError(ValueError):
    pass


def _locate(delims: Sequence[int], value: int) -> tuple[int, int]:
    """Consecutive delimiter pair enclosing ``value`` strictly."""
    k = bisect.bisect_left(delims, value)
    if k < len(delims) and delims[k] == value:
        raise CycleGeometryError("crossing at a delimiter level")
    if k == 0 or k == len(delims):
        raise CycleGeometryError("crossing outside the window")
    return delims[k - 1], delims[k]


def crossed_edges(points: Sequence[tuple[int, int]], bl: BlockLattice, *, closed: bool) -> list[Point]:
    """Midpoints of block edges crossed by a diagonal-step polyline,
    in crossing order. Raises on degenerate crossings through a
    block-lattice vertex or outside the window."""
    v_set = set(bl.v_lines)
    h_set = set(bl.h_lines)
    vd = bl.v_delims
    hd = bl.h_delims
    (x0, x1), (y0, y1) = bl.window
    out: list[Point] = []
    n = len(points)
    last = n if closed else n - 1
    for k in range(last):
        p = points[k]
        q = points[(k + 1) % n]
        if abs(p[0] - q[0]) != 1 or abs(p[1] - q[1]) != 1:
            raise CycleGeometryError(f"non-diagonal step {p} -> {q}")
        if not (x0 <= p[0] < x1 and y0 <= p[1] < y1):
            raise CycleGeometryError(f"vertex {p} outside window")
        sx = min(p[0], q[0])
        sy = min(p[1], q[1])
        v_hit = sx in v_set
        h_hit = sy in h_set
        if v_hit and h_hit:
            raise CycleGeometryError(f"step {p} -> {q} passes through a block-lattice vertex")
        if v_hit:
            a, b = _locate(hd, p[1] + q[1])
            out.append((2 * sx + 1, (a + b) // 2))
        elif h_hit:
            a, b = _locate(vd, p[0] + q[0])
            out.append(((a + b) // 2, 2 * sy + 1))
    return out


def cycle_to_midedge(cycle: Sequence[tuple[int, int]], bl: BlockLattice) -> MidEdgeCycle:
    """Map a closed diagonal-step vertex cycle to its mid-edge cycle.

    Trap 2-cycles cross nothing (their edges are embedded as arcs inside
    one cell) and yield the empty, non-enclosing cycle. Accepts hand
    crafted cycles that need not be walk-graph paths.
    """
    pts = list(cycle)
    if len(pts) >= 2 and pts[0] == pts[-1]:
        pts = pts[:-1]
    if len(pts) < 2:
        raise CycleGeometryError("cycle needs at least two vertices")
    if len(pts) == 2:
        return MidEdgeCycle(vertices=(), simple=True, planar_embedding_ok=True, s=0, t=0)
    mids = crossed_edges(pts, bl, closed=True)
    simple = len(set(mids)) == len(mids)
    planar = simple and not polygon_self_intersects(mids)
    return MidEdgeCycle(vertices=tuple(mids), simple=simple, planar_embedding_ok=planar)


def _seg_intersect_proper_or_touch(p1, p2, q1, q2) -> bool:
    """True if closed segments share any point besides a common endpoint."""
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_seg(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    shared = {p1, p2} & {q1, q2}
    o1 = orient(p1, p2, q1)
    o2 = orient(p1, p2, q2)
    o3 = orient(q1, q2, p1)
    o4 = orient(q1, q2, p2)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 and o2 and o3 and o4:
        return True
    for a, b, c in ((p1, p2, q1), (p1, p2, q2), (q1, q2, p1), (q1, q2, p2)):
        if orient(a, b, c) == 0 and on_seg(a, b, c) and c not in shared:
            return True
    return False


def polygon_self_intersects(points: Sequence[Point]) -> bool:
    """Whether the closed polyline through ``points`` touches itself
    anywhere except at shared endpoints of adjacent segments."""
    n = len(points)
    if n < 3:
        return False
    segs = [(points[i], points[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            p1, p2 = segs[i]
            q1, q2 = segs[j]
            if adjacent:
                # consecutive segments legitimately share one endpoint
                shared = {p1, p2} & {q1, q2}
                if len(shared) != 1:
                    return True
                if _seg_intersect_proper_or_touch(p1, p2, q1, q2):
                    return True
            elif _seg_intersect_proper_or_touch(p1, p2, q1, q2):
                return True
    return False


def point_in_polygon(query: Point, polygon: Sequence[Point]) -> bool:
    """Even-odd test with an exact rightward ray cast slightly above the
    query point. Coordinates are doubled ints; internally everything is
    rescaled so the ray offset stays strictly between lattice levels,
    and the scale doubles on the (provably rare) exact-tie cases.
    """
    n = len(polygon)
    scale = 2
    for _ in range(64):
        qx, qy = query[0] * scale, query[1] * scale + 1
        inside = False
        tie = False
        for i in range(n):
            x1, y1 = polygon[i][0] * scale, polygon[i][1] * scale
            x2, y2 = polygon[(i + 1) % n][0] * scale, polygon[(i + 1) % n][1] * scale
            if (y1 > qy) == (y2 > qy):
                continue
            # sign of (x_cross - qx): cross-multiplied, oriented by dy
            dy = y2 - y1
            num = (x1 - qx) * dy + (x2 - x1) * (qy - y1)
            if num == 0:
                tie = True
                break
            if (num > 0) == (dy > 0):
                inside = not inside
        if not tie:
            return inside
        scale *= 2
    raise RuntimeError("point-in-polygon ties did not resolve")


def interior_counts(mc: MidEdgeCycle, bl: BlockLattice) -> tuple[int, int]:
    """(sources, traps) strictly inside a simple planar mid-edge cycle."""
    if not mc.simple or not mc.planar_embedding_ok:
        raise ValueError("interior counts need a simple planar cycle")
    if len(mc.vertices) < 3:
        raise ValueError("degenerate cycle encloses nothing")
    s = t = 0
    for pt, kind in bl.vertex_points().items():
        if point_in_polygon(pt, mc.vertices):
            if kind == SOURCE:
                s += 1
            else:
                t += 1
    return s, t


def enclosed_cell_counts(cycle: Sequence[tuple[int, int]], env: Environment, bl: BlockLattice) -> tuple[int, int]:
    """(source, trap) cells strictly inside a closed vertex cycle,
    counted directly on the cell taxonomy (independent of the mid-edge
    mapping; used to cross-check count preservation)."""
    pts = list(cycle)
    if pts[0] == pts[-1]:
        pts = pts[:-1]
    poly = [(2 * x, 2 * y) for x, y in pts]
    (x0, x1), (y0, y1) = bl.window
    s = t = 0
    for cx in range(x0, x1 - 1):
        for cy in range(y0, y1 - 1):
            center = (2 * cx + 1, 2 * cy + 1)
            if point_in_polygon(center, poly):
                kind = classify_cell(env, (cx, cy)).kind
                if kind == SOURCE:
                    s += 1
                elif kind == TRAP:
                    t += 1
    return s, t


def enumerate_simple_cycles(meg: MidEdgeGraph, max_len: int) -> list[tuple[Point, ...]]:
    """All simple directed cycles of length <= max_len, each reported
    once, rotated to start at its least vertex."""
    cycles: list[tuple[Point, ...]] = []
    for v0 in meg.vertices:
        stack: list[tuple[Point, tuple[Point, ...]]] = [(v0, (v0,))]
        while stack:
            cur, path = stack.pop()
            for nxt in meg.successors(cur):
                if nxt == v0:
                    if len(path) >= 3:
                        cycles.append(path)
                    continue
                if nxt < v0 or nxt in path:
                    continue
                if len(path) < max_len:
                    stack.append((nxt, path + (nxt,)))
    return cycles
