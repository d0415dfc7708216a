"""The deterministic diagonal walk and its cycle detection.

From vertex v the walk moves by +-1 in every coordinate simultaneously,
coordinate i following the orientation of the line through v parallel to
axis i. The trajectory is a rho: a self-avoiding stem entering a cycle.
In 2D the cycle is always a trap (two opposite edges); in higher
dimension longer periods occur.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .env import Environment

Vertex = tuple[int, ...]

ABSORBED = "cycle"
EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class WalkOutcome:
    """Summary of one walk run.

    ``cycle_entry`` is the step index of the first vertex that is later
    revisited periodically; ``period`` the gap between its two visits.
    ``max_sup_norm`` is max over executed steps of ||Z_i - Z_0||_inf.
    """

    start: Vertex
    absorption: str
    cycle_entry: int | None = None
    period: int | None = None
    cycle_vertices: tuple[Vertex, ...] = ()
    max_sup_norm: int = 0
    steps_executed: int = 0
    footprint: int = 0
    memory_exhausted: bool = False
    trajectory_prefix: tuple[Vertex, ...] = field(default=(), repr=False)

    @property
    def absorbed(self) -> bool:
        return self.absorption == ABSORBED


def step(env: Environment, v: Vertex) -> Vertex:
    """One move of the diagonal walk."""
    return tuple(c + env.orientation(axis, env.line_key(axis, v))
                 for axis, c in enumerate(v))


def run(
    env: Environment,
    start: Vertex,
    budget: int,
    *,
    keep_prefix: int = 0,
    memory_cap: int | None = None,
) -> WalkOutcome:
    """Iterate the walk until a vertex repeats or the budget runs out.

    Cycle detection keeps the full set of visited vertices (the footprint
    is a.s. finite), which yields the exact first-revisit index and the
    footprint census. In 2D a reversal check Z_{n+1} == Z_{n-1} fires on
    the same step the general detector would; it exists as the
    documented fast path and the general detector stays as safety net.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    start = tuple(int(c) for c in start)
    if len(start) != env.dimension:
        raise ValueError(f"start vertex has {len(start)} coordinates, need {env.dimension}")

    trajectory: list[Vertex] = [start]
    first_index: dict[Vertex, int] = {start: 0}
    max_sup = 0
    current = start
    previous: Vertex | None = None
    is_2d = env.dimension == 2

    for n in range(budget):
        nxt = step(env, current)
        if is_2d and nxt == previous:
            revisit_at = first_index[nxt]
            return _finish(start, trajectory, revisit_at, n + 1, 2, max_sup, keep_prefix)
        seen = first_index.get(nxt)
        if seen is not None:
            period = n + 1 - seen
            return _finish(start, trajectory, seen, n + 1, period, max_sup, keep_prefix)
        sup = max(abs(a - b) for a, b in zip(nxt, start))
        if sup > max_sup:
            max_sup = sup
        first_index[nxt] = n + 1
        trajectory.append(nxt)
        if memory_cap is not None and len(first_index) > memory_cap:
            return WalkOutcome(
                start=start,
                absorption=EXHAUSTED,
                max_sup_norm=max_sup,
                steps_executed=n + 1,
                footprint=len(first_index),
                memory_exhausted=True,
                trajectory_prefix=tuple(trajectory[:keep_prefix]),
            )
        previous, current = current, nxt

    return WalkOutcome(
        start=start,
        absorption=EXHAUSTED,
        max_sup_norm=max_sup,
        steps_executed=budget,
        footprint=len(first_index),
        trajectory_prefix=tuple(trajectory[:keep_prefix]),
    )


def _finish(start, trajectory, entry, steps, period, max_sup, keep_prefix) -> WalkOutcome:
    cycle = tuple(trajectory[entry:entry + period])
    return WalkOutcome(
        start=start,
        absorption=ABSORBED,
        cycle_entry=entry,
        period=period,
        cycle_vertices=cycle,
        max_sup_norm=max_sup,
        steps_executed=steps,
        footprint=len(trajectory),
        trajectory_prefix=tuple(trajectory[:keep_prefix]),
    )


def trajectory_vertices(env: Environment, start: Vertex, budget: int) -> list[Vertex]:
    """Ordered distinct vertices of the forward orbit, through its cycle.

    Raises RuntimeError when the budget is exhausted before absorption.
    """
    start = tuple(int(c) for c in start)
    seen = {start}
    out = [start]
    current = start
    for _ in range(budget):
        current = step(env, current)
        if current in seen:
            return out
        seen.add(current)
        out.append(current)
    raise RuntimeError("walk not absorbed within budget")
