"""Removal of alternating orientation patterns (the reduced model).

A site x is an alternance site when u_{x-1} != u_x != u_{x+1}. Maximal
runs of such sites are removed wholesale; odd runs additionally drop the
first sign to their right, which merges the equal signs flanking them.
The surviving signs, shifted toward zero, contain no alternance site:
every block of equal signs in the output has length at least 2.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .env import Environment, MissingLineError, make_env
from .graph import reaches

SeqView = Callable[[int], int]


class WindowTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class ReductionMap:
    """Alternance sites, removal set and index maps for one axis window.

    ``A`` and ``B`` are sorted absolute indices inside ``window``;
    ``unresolved`` lists alternance sites whose run touches the window
    boundary (left in place, never removed). ``sigma``/``pi`` are the
    window-restricted shift maps anchored so that pi enumerates kept
    indices from zero outward.
    """

    axis: int
    window: tuple[int, int]
    A: tuple[int, ...]
    block_lengths: dict[int, int]
    B: tuple[int, ...]
    unresolved: tuple[int, ...] = ()

    def __post_init__(self):
        lo, hi = self.window
        if not (lo <= 0 < hi):
            raise WindowTooSmall("reduction window must contain index 0 (the anchor)")

    @cached_property
    def _kept(self) -> tuple[list[int], list[int]]:
        lo, hi = self.window
        removed = set(self.B)
        nonneg = [i for i in range(0, hi) if i not in removed]
        neg = [i for i in range(-1, lo - 1, -1) if i not in removed]
        return nonneg, neg

    def sigma(self, n: int) -> int:
        """n-th kept index: the (n+1)-th of {0,1,...}\\B for n>=0, the
        (-n)-th of {-1,-2,...}\\B for n<=-1."""
        nonneg, neg = self._kept
        if n >= 0:
            if n >= len(nonneg):
                raise IndexError(f"sigma({n}) outside window")
            return nonneg[n]
        if -n > len(neg):
            raise IndexError(f"sigma({n}) outside window")
        return neg[-n - 1]

    def pi(self, x: int) -> int:
        """Inverse of sigma on window \\ B."""
        lo, hi = self.window
        if not lo <= x < hi:
            raise IndexError(f"pi({x}) outside window")
        b = self.B
        if bisect.bisect_left(b, x) < len(b) and b[bisect.bisect_left(b, x)] == x:
            raise KeyError(f"{x} is removed")
        if x >= 0:
            kept_before = x - bisect.bisect_left(b, x) + bisect.bisect_left(b, 0)
            return kept_before
        removed_in = bisect.bisect_left(b, 0) - bisect.bisect_left(b, x)
        return x + removed_in

    def reduced_range(self) -> tuple[int, int]:
        nonneg, neg = self._kept
        return (-len(neg), len(nonneg))


def _values(seq: SeqView, lo: int, hi: int) -> np.ndarray:
    vals = np.fromiter((seq(i) for i in range(lo, hi)), dtype=np.int8, count=hi - lo)
    if not np.isin(vals, (-1, 1)).all():
        raise ValueError("sequence values must be +-1")
    return vals


def alternance_mask(values: np.ndarray) -> np.ndarray:
    """Boolean mask over values[1:-1]: left and right neighbor both differ."""
    return (values[:-2] != values[1:-1]) & (values[1:-1] != values[2:])


def alternance_sites(seq: SeqView, window: tuple[int, int]) -> tuple[int, ...]:
    """Interior alternance sites of the window."""
    lo, hi = window
    if hi - lo < 3:
        raise WindowTooSmall("need at least one interior site with both neighbors")
    vals = _values(seq, lo, hi)
    mask = alternance_mask(vals)
    return tuple(int(i) + lo + 1 for i in np.nonzero(mask)[0])


def _runs(sorted_sites: Sequence[int]) -> list[tuple[int, int]]:
    runs = []
    for x in sorted_sites:
        if runs and x == runs[-1][1] + 1:
            runs[-1] = (runs[-1][0], x)
        else:
            runs.append((x, x))
    return runs


def removal_set(seq: SeqView, window: tuple[int, int], axis: int = 0) -> ReductionMap:
    """Alternance runs, their lengths and the removal set for one window.

    Runs touching the window boundary cannot be delimited and are
    flagged unresolved instead of removed.
    """
    lo, hi = window
    sites = alternance_sites(seq, window)
    A: list[int] = []
    lengths: dict[int, int] = {}
    B: list[int] = []
    unresolved: list[int] = []
    for start, end in _runs(sites):
        if start <= lo + 1 or end >= hi - 2:
            unresolved.extend(range(start, end + 1))
            continue
        run_len = end - start + 1
        for x in range(start, end + 1):
            A.append(x)
            lengths[x] = run_len
        B.extend(range(start, end + 1))
        if run_len % 2 == 1:
            B.append(end + 1)
    return ReductionMap(
        axis=axis,
        window=window,
        A=tuple(A),
        block_lengths=lengths,
        B=tuple(sorted(B)),
        unresolved=tuple(unresolved),
    )


def index_maps(rmap: ReductionMap):
    """(sigma, pi) callables of the map; sigma strictly increasing onto
    window minus B, pi its inverse."""
    return rmap.sigma, rmap.pi


def _reduce_axis(env: Environment, axis: int, window: tuple[int, int]) -> ReductionMap:
    """Removal set for the core window, with margins grown until every
    run meeting the core is fully delimited."""
    lo, hi = window
    for margin in (16, 64, 256, 1024, 4096):
        rmap = removal_set(lambda i: env.orientation(axis, (i,)), (lo - margin, hi + margin), axis)
        if all(x < lo - 2 or x >= hi + 2 for x in rmap.unresolved):
            break
    else:
        raise RuntimeError(f"axis {axis}: alternance run exceeds maximal margin")
    inside = [x for x in rmap.B if lo <= x < hi]
    A_in = tuple(x for x in rmap.A if lo <= x < hi)
    return ReductionMap(
        axis=axis,
        window=window,
        A=A_in,
        block_lengths={x: rmap.block_lengths[x] for x in A_in},
        B=tuple(inside),
        unresolved=(),
    )


def reduce_env(env: Environment, window: tuple[int, int]) -> tuple[Environment, dict[int, ReductionMap]]:
    """Reduce both axes of a 2D environment over one index window.

    Returns a strict explicit environment holding the reduced
    orientation tables over the contracted index ranges, plus the
    per-axis reduction maps (axis 0 reindexes y, axis 1 reindexes x).
    """
    if env.dimension != 2:
        raise ValueError("reduction is defined for 2D environments")
    maps = {axis: _reduce_axis(env, axis, window) for axis in (0, 1)}
    tables: dict[int, dict[int, int]] = {}
    for axis, rmap in maps.items():
        nlo, nhi = rmap.reduced_range()
        tables[axis] = {n: env.orientation(axis, (rmap.sigma(n),)) for n in range(nlo, nhi)}
    reduced = make_env(2, tables=tables, strict=True)
    return reduced, maps


def project_vertex(maps: dict[int, ReductionMap], v: tuple[int, int]) -> tuple[int, int]:
    """Image of a vertex under both index maps; raises KeyError if either
    coordinate is removed. Axis 1 reindexes x, axis 0 reindexes y."""
    return (maps[1].pi(v[0]), maps[0].pi(v[1]))


@dataclass(frozen=True)
class ProjectionCheck:
    a: tuple[int, int]
    b: tuple[int, int]
    original_reaches: bool | None
    projected: tuple[tuple[int, int], tuple[int, int]] | None
    reduced_reaches: bool | None
    preserved: bool | None
    indeterminate: bool


def reduced_env_from_maps(env: Environment, maps: dict[int, ReductionMap]) -> Environment:
    """Materialize the reduced environment tables described by ``maps``."""
    tables: dict[int, dict[int, int]] = {}
    for axis, rmap in maps.items():
        nlo, nhi = rmap.reduced_range()
        tables[axis] = {n: env.orientation(axis, (rmap.sigma(n),)) for n in range(nlo, nhi)}
    return make_env(2, tables=tables, strict=True)


def project_and_check(
    env: Environment,
    maps: dict[int, ReductionMap],
    a: tuple[int, int],
    b: tuple[int, int],
    budget: int,
    reduced: Environment | None = None,
) -> ProjectionCheck:
    """Check that reachability of b from a survives the reduction.

    ``preserved`` is True when the implication (a reaches b) =>
    (pi(a) reaches pi(b) in the reduced graph) holds, False on a
    counterexample, None when either side is undecided within budget.
    Both coordinates of a and b must lie outside the removal sets.
    """
    if reduced is None:
        reduced = reduced_env_from_maps(env, maps)
    pa = project_vertex(maps, a)
    pb = project_vertex(maps, b)
    try:
        orig = reaches(env, a, b, budget)
    except MissingLineError:
        orig = None
    if orig is None:
        return ProjectionCheck(a, b, None, (pa, pb), None, None, True)
    if orig is False:
        return ProjectionCheck(a, b, False, (pa, pb), None, True, False)
    try:
        red = reaches(reduced, pa, pb, budget)
    except MissingLineError:
        red = None
    if red is None:
        return ProjectionCheck(a, b, True, (pa, pb), None, None, True)
    return ProjectionCheck(a, b, True, (pa, pb), red, bool(red), False)


def block_lengths_of(values: np.ndarray) -> np.ndarray:
    """Lengths of maximal equal-sign blocks in a +-1 array."""
    if len(values) == 0:
        return np.zeros(0, dtype=np.int64)
    changes = np.nonzero(values[1:] != values[:-1])[0]
    edges = np.concatenate(([-1], changes, [len(values) - 1]))
    return np.diff(edges).astype(np.int64)


def reduce_array(values: np.ndarray) -> np.ndarray:
    """Array form of the reduction: drop alternance runs (odd runs also
    drop the next sign). Boundary runs stay. Used for census tests."""
    n = len(values)
    mask = np.zeros(n, dtype=bool)
    inner = alternance_mask(values)
    sites = list(np.nonzero(inner)[0] + 1)
    for start, end in _runs(sites):
        if start <= 1 or end >= n - 2:
            continue
        mask[start:end + 1] = True
        if (end - start + 1) % 2 == 1:
            mask[end + 1] = True
    return values[~mask]
