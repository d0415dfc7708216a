"""Cell and vertex taxonomy of the 2D walk graph, components and cycles.

The walk graph has exactly one outgoing diagonal edge per vertex. Each
unit cell is crossed by 0, 1 or 2 of those edges (source / crossing /
trap); when 2, they are the same diagonal in both directions. A corner
of a trap cell is an inward trap vertex if it is an endpoint of the
crossing edges, outward otherwise. Following an edge out of an inward
trap vertex bounces between the trap's two endpoints forever.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .env import Environment
from .walk import step

Vertex = tuple[int, int]
Cell = tuple[int, int]  # base corner (x, y); the cell center is (x+1/2, y+1/2)

SOURCE = "source"
CROSSING = "crossing"
TRAP = "trap"


@dataclass(frozen=True)
class CellClass:
    cell: Cell
    kind: str
    edges: tuple[tuple[Vertex, Vertex], ...]

    @property
    def center(self) -> tuple[float, float]:
        return (self.cell[0] + 0.5, self.cell[1] + 0.5)


@dataclass(frozen=True)
class VertexFlags:
    source_vertex: bool
    inward_trap: bool
    outward_trap: bool


@dataclass(frozen=True)
class ComponentCaps:
    max_members: int = 10_000_000
    max_radius: int = 100_000


@dataclass(frozen=True)
class Component:
    """Connected component of a vertex: its trap and everything draining there.

    ``path`` is the forward orbit of the origin through both trap
    endpoints; ``basin_of_origin`` counts the vertices whose orbit hits
    the origin first among inward trap vertices (only nonzero when the
    origin is one itself).
    """

    origin: Vertex
    members: frozenset[Vertex]
    trap: tuple[Vertex, Vertex] | None
    diameter: int
    size: int
    path: tuple[Vertex, ...]
    truncated: bool
    basin_of_origin: int = 0


def classify_cell(env: Environment, cell: Cell) -> CellClass:
    """Classify the cell with base corner ``cell`` by its crossing edges.

    The four candidate diagonal edges of a cell are each present exactly
    when the two line orientations at their tail point into the cell.
    """
    if env.dimension != 2:
        raise ValueError("cell taxonomy is defined in 2D only")
    x, y = cell
    uy, uy1 = env.u(y), env.u(y + 1)
    vx, vx1 = env.v(x), env.v(x + 1)
    edges: list[tuple[Vertex, Vertex]] = []
    if uy == 1 and vx == 1:
        edges.append(((x, y), (x + 1, y + 1)))
    if uy1 == -1 and vx1 == -1:
        edges.append(((x + 1, y + 1), (x, y)))
    if uy == -1 and vx1 == 1:
        edges.append(((x + 1, y), (x, y + 1)))
    if uy1 == 1 and vx == -1:
        edges.append(((x, y + 1), (x + 1, y)))
    kind = (SOURCE, CROSSING, TRAP)[len(edges)]
    return CellClass(cell=cell, kind=kind, edges=tuple(edges))


def classify_vertex(env: Environment, v: Vertex) -> VertexFlags:
    """Flags of ``v`` from the four incident cells; flags may combine."""
    x, y = v
    source = inward = outward = False
    for cx, cy in ((x - 1, y - 1), (x, y - 1), (x - 1, y), (x, y)):
        cc = classify_cell(env, (cx, cy))
        if cc.kind == SOURCE:
            source = True
        elif cc.kind == TRAP:
            if v in cc.edges[0]:
                inward = True
            else:
                outward = True
    return VertexFlags(source_vertex=source, inward_trap=inward, outward_trap=outward)


class LineCache:
    """Memoized per-line orientation lookups for one 2D environment.

    Orientation queries are pure, so caching them is free; the graph
    search loops below hit the same few lines constantly.
    """

    __slots__ = ("_env", "_u", "_v")

    def __init__(self, env: Environment):
        if env.dimension != 2:
            raise ValueError("LineCache is 2D")
        self._env = env
        self._u: dict[int, int] = {}
        self._v: dict[int, int] = {}

    def u(self, y: int) -> int:
        val = self._u.get(y)
        if val is None:
            val = self._env.u(y)
            self._u[y] = val
        return val

    def v(self, x: int) -> int:
        val = self._v.get(x)
        if val is None:
            val = self._env.v(x)
            self._v[x] = val
        return val

    def step(self, v: Vertex) -> Vertex:
        return (v[0] + self.u(v[1]), v[1] + self.v(v[0]))

    def inward_trap(self, vert: Vertex) -> bool:
        x, y = vert
        uy = self.u(y)
        vx = self.v(x)
        if uy == 1 and vx == 1:
            return self.u(y + 1) == -1 and self.v(x + 1) == -1
        if uy == -1 and vx == -1:
            return self.u(y - 1) == 1 and self.v(x - 1) == 1
        if uy == -1 and vx == 1:
            return self.u(y + 1) == 1 and self.v(x - 1) == -1
        return self.u(y - 1) == -1 and self.v(x + 1) == 1

    def in_neighbors(self, v: Vertex) -> list[Vertex]:
        x, y = v
        out = []
        for u in ((x - 1, y - 1), (x - 1, y + 1), (x + 1, y - 1), (x + 1, y + 1)):
            if u[0] + self.u(u[1]) == x and u[1] + self.v(u[0]) == y:
                out.append(u)
        return out


def is_inward_trap(env: Environment, v: Vertex) -> bool:
    """Fast path for the single flag the reachability rule needs."""
    x, y = v
    uy = env.u(y)
    vx = env.v(x)
    if uy == 1 and vx == 1:
        return env.u(y + 1) == -1 and env.v(x + 1) == -1
    if uy == -1 and vx == -1:
        return env.u(y - 1) == 1 and env.v(x - 1) == 1
    if uy == -1 and vx == 1:
        return env.u(y + 1) == 1 and env.v(x - 1) == -1
    return env.u(y - 1) == -1 and env.v(x + 1) == 1


def in_neighbors(env: Environment, v: Vertex) -> set[Vertex]:
    """All diagonal neighbors stepping onto ``v`` (any dimension)."""
    d = env.dimension
    out: set[Vertex] = set()

    def rec(prefix: list[int], i: int):
        if i == d:
            u = tuple(prefix)
            if step(env, u) == v:
                out.add(u)
            return
        for s in (-1, 1):
            prefix.append(v[i] + s)
            rec(prefix, i + 1)
            prefix.pop()

    rec([], 0)
    return out


def reaches(env: Environment, a: Vertex, b: Vertex, budget: int) -> bool | None:
    """Whether the forward path from a hits b with no inward trap vertex
    strictly in between. Returns None when the budget ran out first.

    a == b holds via the empty path; an inward trap vertex reached along
    the way may only be the endpoint, so hitting one other than b
    decides negatively (the walk then cycles inside the trap forever).
    """
    a = (int(a[0]), int(a[1]))
    b = (int(b[0]), int(b[1]))
    if a == b:
        return True
    lines = LineCache(env)
    current = a
    for _ in range(budget):
        current = lines.step(current)
        if current == b:
            return True
        if lines.inward_trap(current):
            return False
    return None


def component(env: Environment, o: Vertex, caps: ComponentCaps | None = None) -> Component:
    """Component of ``o``: forward orbit to its trap, then reverse BFS.

    The reverse search honors the no-trap-crossing rule: an inward trap
    vertex can join as a path endpoint but is never expanded through.
    Started from every orbit vertex (both trap endpoints included) this
    collects both drainage basins of the trap.
    """
    if env.dimension != 2:
        raise ValueError("component analysis is 2D")
    caps = caps or ComponentCaps()
    o = (int(o[0]), int(o[1]))
    lines = LineCache(env)
    truncated = False

    path: list[Vertex] = [o]
    seen_path = {o}
    current = o
    for _ in range(caps.max_members):
        nxt = lines.step(current)
        if nxt in seen_path:
            break
        path.append(nxt)
        seen_path.add(nxt)
        current = nxt
    else:
        truncated = True

    trap: tuple[Vertex, Vertex] | None = None
    if not truncated and len(path) >= 2 and lines.step(path[-1]) == path[-2]:
        trap = (path[-2], path[-1])

    members: set[Vertex] = set(path)
    queue: list[Vertex] = list(path)
    qi = 0
    while qi < len(queue):
        w = queue[qi]
        qi += 1
        for u in lines.in_neighbors(w):
            if u in members:
                continue
            if (max(abs(u[0] - o[0]), abs(u[1] - o[1])) > caps.max_radius
                    or len(members) >= caps.max_members):
                truncated = True
                continue
            members.add(u)
            if not lines.inward_trap(u):
                queue.append(u)

    basin = 0
    if trap is not None and o == trap[0]:
        basin = _basin_size(env, o, caps, lines)

    xs = [p[0] for p in members]
    ys = [p[1] for p in members]
    diameter = max(max(xs) - min(xs), max(ys) - min(ys))
    return Component(
        origin=o,
        members=frozenset(members),
        trap=trap,
        diameter=diameter,
        size=len(members),
        path=tuple(path),
        truncated=truncated,
        basin_of_origin=basin,
    )


def _basin_size(env: Environment, t: Vertex, caps: ComponentCaps,
                lines: LineCache | None = None) -> int:
    """Number of vertices whose orbit meets ``t`` before any other inward
    trap vertex (``t`` itself included; its trap partner is not)."""
    lines = lines or LineCache(env)
    seen = {t}
    queue = [t]
    qi = 0
    while qi < len(queue):
        w = queue[qi]
        qi += 1
        for u in lines.in_neighbors(w):
            if u in seen:
                continue
            seen.add(u)
            if len(seen) > caps.max_members:
                return len(seen) - 1
            if not lines.inward_trap(u):
                queue.append(u)
    # members reached here are exactly {u : u -> t}; drop the trap partner
    partner = lines.step(t)
    return len(seen) - (1 if partner in seen else 0)


Window = tuple[tuple[int, int], tuple[int, int]]


def iter_window_vertices(window: Window) -> Iterator[Vertex]:
    (x0, x1), (y0, y1) = window
    for x in range(x0, x1):
        for y in range(y0, y1):
            yield (x, y)


def _canonical_cycle(cycle: list[Vertex]) -> tuple[Vertex, ...]:
    k = cycle.index(min(cycle))
    return tuple(cycle[k:] + cycle[:k])


def enumerate_cycles(env: Environment, window: Window, step_budget: int | None = None) -> list[tuple[Vertex, ...]]:
    """All cycles of the walk graph fully inside a half-open window.

    Follows the out-edge of every window vertex; paths that leave the
    window are recorded as escaped, not followed. Amortized linear via
    vertex coloring. Cycles are canonicalized at their least vertex.
    """
    (x0, x1), (y0, y1) = window
    lines = LineCache(env)
    # one orientation query per window line, then the walk is pure lookups
    u_row = {y: lines.u(y) for y in range(y0, y1)}
    v_col = {x: lines.v(x) for x in range(x0, x1)}
    status: dict[Vertex, int] = {}  # 1 = on current path, 2 = resolved
    cycles: list[tuple[Vertex, ...]] = []
    spent = 0

    for start in iter_window_vertices(window):
        if start in status:
            continue
        path: list[Vertex] = []
        pos: dict[Vertex, int] = {}
        current = start
        while True:
            if step_budget is not None and spent >= step_budget:
                for p in path:
                    status[p] = 2
                return cycles
            state = status.get(current)
            if state == 2 or not (x0 <= current[0] < x1 and y0 <= current[1] < y1):
                break
            if current in pos:
                cycles.append(_canonical_cycle(path[pos[current]:]))
                break
            pos[current] = len(path)
            path.append(current)
            status[current] = 1
            cx, cy = current
            current = (cx + u_row[cy], cy + v_col[cx])
            spent += 1
        for p in path:
            status[p] = 2
    return cycles


def window_census(env: Environment, window: Window) -> dict[str, int]:
    """Source / crossing / trap counts over the cells of a window."""
    counts = {SOURCE: 0, CROSSING: 0, TRAP: 0}
    (x0, x1), (y0, y1) = window
    for x in range(x0, x1):
        for y in range(y0, y1):
            counts[classify_cell(env, (x, y)).kind] += 1
    return counts


def iter_omega_edges(env: Environment, window: Window) -> Iterator[tuple[Vertex, Vertex]]:
    """The out-edge of every vertex in the window."""
    for v in iter_window_vertices(window):
        yield v, step(env, v)
