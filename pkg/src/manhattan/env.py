"""Random line orientations for the oriented Manhattan lattice.

Every axis-parallel line in Z^d carries a fixed orientation in {-1, +1}.
A line parallel to axis ``i`` is identified by the (d-1)-tuple of the
remaining coordinates, taken in cyclic order ``(i+1, ..., i+d-1) mod d``.
In 2D that means horizontal lines (axis 0) are keyed by y and vertical
lines (axis 1) by x; in 3D the keys are (y,z), (z,x) and (x,y).

Seeded environments are counter-based: each orientation is the sign bit
of a 64-bit hash of (seed, axis, line key), so queries are pure, order
independent and need no stored state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

MASK64 = (1 << 64) - 1
COORD_LIMIT = 1 << 62  # beyond this a walk is considered pathological

_SEED_SALT = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

FORMAT_NAME = "manhattan-env"
FORMAT_VERSION = 1
GENERATOR_ID = "splitmix64-v1"


class EnvironmentError_(ValueError):
    """Invalid environment construction or query."""


class MissingLineError(KeyError):
    """Strict explicit environment queried for an absent line."""


class CoordinateOverflowError(OverflowError):
    """A coordinate left the safe 64-bit range (|c| >= 2**62)."""


def _mix64(z: int) -> int:
    z &= MASK64
    z ^= z >> 30
    z = (z * _M1) & MASK64
    z ^= z >> 27
    z = (z * _M2) & MASK64
    z ^= z >> 31
    return z


def line_hash(seed: int, axis: int, coords: Sequence[int]) -> int:
    """64-bit hash of one line key; the orientation is its top bit."""
    h = _mix64((seed & MASK64) ^ _SEED_SALT)
    h = _mix64(h ^ (axis + 1))
    for c in coords:
        h = _mix64(h ^ (c & MASK64))
    return h


def line_hash_array(seeds, axis: int, coords) -> np.ndarray:
    """Vectorized :func:`line_hash`.

    ``seeds`` is a uint64 scalar or array, ``coords`` a sequence of int64
    arrays (one per transverse coordinate). Broadcasts like numpy does.
    Bit-for-bit identical to the scalar version; tests enforce this.
    """
    m1 = np.uint64(_M1)
    m2 = np.uint64(_M2)

    def mix(z):
        z = z ^ (z >> np.uint64(30))
        z = z * m1
        z = z ^ (z >> np.uint64(27))
        z = z * m2
        z = z ^ (z >> np.uint64(31))
        return z

    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        h = mix(np.asarray(seeds, dtype=np.uint64) ^ np.uint64(_SEED_SALT))
        h = mix(h ^ np.uint64(axis + 1))
        for c in coords:
            h = mix(h ^ np.asarray(c).astype(np.int64).view(np.uint64))
    return h


def sign_from_hash(h: int) -> int:
    return 1 if (h >> 63) == 0 else -1


def signs_from_hash_array(h: np.ndarray) -> np.ndarray:
    """Orientations (+-1, int64) from an array of hashes."""
    return np.where((h >> np.uint64(63)) == 0, 1, -1).astype(np.int64)


def _check_coord(c: int) -> int:
    if not -COORD_LIMIT < c < COORD_LIMIT:
        raise CoordinateOverflowError(f"coordinate {c} outside safe range")
    return c


@dataclass(frozen=True)
class Environment:
    """Immutable orientation assignment for all lines of Z^d.

    ``tables[axis]`` maps line keys to stored orientations. With a seed
    present, missing keys fall back to the seeded generator (hybrid);
    ``strict=True`` makes missing keys an error instead.
    """

    dimension: int
    seed: int | None = None
    tables: tuple[Mapping[tuple[int, ...], int], ...] | None = None
    strict: bool = False
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.dimension < 2:
            raise EnvironmentError_(f"dimension must be >= 2, got {self.dimension}")
        if self.seed is None and self.tables is None:
            raise EnvironmentError_("need a seed, explicit tables, or both")
        if self.strict and self.tables is None:
            raise EnvironmentError_("strict mode requires explicit tables")

    @property
    def seeded_only(self) -> bool:
        return self.tables is None or all(not t for t in self.tables)

    def orientation(self, axis: int, transverse: Sequence[int]) -> int:
        if not 0 <= axis < self.dimension:
            raise EnvironmentError_(f"axis {axis} out of range for d={self.dimension}")
        key = tuple(_check_coord(c) for c in transverse)
        if len(key) != self.dimension - 1:
            raise EnvironmentError_(
                f"expected {self.dimension - 1} transverse coordinates, got {len(key)}"
            )
        if self.tables is not None:
            value = self.tables[axis].get(key)
            if value is not None:
                return value
            if self.strict or self.seed is None:
                raise MissingLineError((axis, key))
        return sign_from_hash(line_hash(self.seed, axis, key))

    def line_key(self, axis: int, vertex: Sequence[int]) -> tuple[int, ...]:
        """Transverse key of the line through ``vertex`` parallel to ``axis``."""
        d = self.dimension
        return tuple(vertex[(axis + j) % d] for j in range(1, d))

    # 2D sugar used heavily by the graph and reduction code.
    def u(self, y: int) -> int:
        """Orientation of the horizontal line at height y (drives x-steps)."""
        return self.orientation(0, (y,))

    def v(self, x: int) -> int:
        """Orientation of the vertical line at abscissa x (drives y-steps)."""
        return self.orientation(1, (x,))


def _normalize_tables(dimension: int, tables) -> tuple[dict, ...]:
    out: list[dict] = [dict() for _ in range(dimension)]
    for axis, entries in tables.items():
        axis = int(axis)
        if not 0 <= axis < dimension:
            raise EnvironmentError_(f"table axis {axis} out of range")
        for key, value in entries.items():
            if isinstance(key, int):
                key = (key,)
            key = tuple(int(c) for c in key)
            if len(key) != dimension - 1:
                raise EnvironmentError_(f"bad key {key} for axis {axis}")
            if value not in (-1, 1):
                raise EnvironmentError_(f"orientation must be +-1, got {value!r}")
            out[axis][key] = int(value)
    return tuple(out)


def make_env(
    dimension: int,
    *,
    seed: int | None = None,
    tables=None,
    strict: bool = False,
    label: str = "",
) -> Environment:
    """Build an Environment from a seed, explicit tables, or both (hybrid)."""
    norm = _normalize_tables(dimension, tables) if tables is not None else None
    return Environment(dimension=dimension, seed=seed, tables=norm, strict=strict, label=label)


def orientation(env: Environment, axis: int, transverse: Sequence[int]) -> int:
    return env.orientation(axis, transverse)


def _axis_keys(dimension: int, axis: int, window: Sequence[tuple[int, int]]) -> Iterable[tuple[int, ...]]:
    ranges = [range(*window[(axis + j) % dimension]) for j in range(1, dimension)]
    if len(ranges) == 1:
        for a in ranges[0]:
            yield (a,)
    else:
        def rec(prefix, rest):
            if not rest:
                yield tuple(prefix)
                return
            for a in rest[0]:
                yield from rec(prefix + [a], rest[1:])
        yield from rec([], ranges)


def persist_window(env: Environment, window: Sequence[tuple[int, int]], path) -> None:
    """Save every line orientation relevant to ``window`` as versioned JSON.

    ``window`` gives one half-open integer range per space coordinate.
    """
    if len(window) != env.dimension:
        raise EnvironmentError_("window must give one (lo, hi) range per coordinate")
    for lo, hi in window:
        if hi < lo:
            raise EnvironmentError_(f"empty or inverted range ({lo}, {hi})")
    axes = []
    for axis in range(env.dimension):
        entries = [[list(key), env.orientation(axis, key)]
                   for key in _axis_keys(env.dimension, axis, window)]
        axes.append({"axis": axis, "entries": entries})
    mode = "seeded" if env.tables is None else ("strict" if env.strict else "hybrid")
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "dimension": env.dimension,
        "mode": mode,
        "generator": GENERATOR_ID if env.seed is not None else None,
        "seed": env.seed,
        "window": [list(r) for r in window],
        "axes": axes,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_window(path, *, strict: bool | None = None) -> Environment:
    """Load a persisted window back into an explicit Environment.

    The stored seed (if any) is kept as fallback unless ``strict=True``.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT_NAME:
        raise EnvironmentError_(f"not a {FORMAT_NAME} file")
    if doc.get("version") != FORMAT_VERSION:
        raise EnvironmentError_(f"unsupported version {doc.get('version')!r}")
    dimension = int(doc["dimension"])
    seed = doc.get("seed")
    window = doc.get("window")
    tables: dict[int, dict] = {}
    for axis_doc in doc["axes"]:
        axis = int(axis_doc["axis"])
        entries = {}
        for key, value in axis_doc["entries"]:
            if value not in (-1, 1):
                raise EnvironmentError_(f"orientation must be +-1, got {value!r}")
            entries[tuple(int(c) for c in key)] = int(value)
        if window is not None:
            expected = set(_axis_keys(dimension, axis, [tuple(r) for r in window]))
            if set(entries) != expected:
                raise EnvironmentError_(
                    f"axis {axis} entries do not match the declared window")
        tables[axis] = entries
    if strict is None:
        strict = seed is None
    return make_env(dimension, seed=None if strict else seed, tables=tables, strict=strict)
