"""Monte Carlo estimation of the model's quantitative claims.

Every estimate is a pure function of (master_seed, config): sample i
runs in a fresh environment seeded by a hash of (master_seed, i), so
samples are i.i.d. over environments, reproducible, and independent of
worker count or execution order. Walk batches are stepped in numpy with
a snapshot-comparison cycle detector (exact period, exact within-budget
detection); aggregation only ever sums integers, which keeps artifacts
byte-identical across schedules.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .env import MASK64, _mix64, line_hash_array, make_env, signs_from_hash_array
from .graph import ComponentCaps, component
from .walk import run

_SAMPLE_SALT = 0x5851F42D4C957F2D


def derive_seed(master_seed: int, index: int) -> int:
    """Per-sample environment seed."""
    return _mix64(_mix64((master_seed & MASK64) ^ _SAMPLE_SALT) ^ (index & MASK64))


def _derive_seeds(master_seed: int, start: int, count: int) -> np.ndarray:
    base = np.uint64(_mix64((master_seed & MASK64) ^ _SAMPLE_SALT))
    idx = np.arange(start, start + count, dtype=np.uint64)
    z = base ^ idx
    m1 = np.uint64(0xBF58476D1CE4E5B9)
    m2 = np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(30))
    z = z * m1
    z = z ^ (z >> np.uint64(27))
    z = z * m2
    z = z ^ (z >> np.uint64(31))
    return z


def _line_signs(seeds: np.ndarray, axis: int, coords) -> np.ndarray:
    return signs_from_hash_array(line_hash_array(seeds, axis, coords))


def _inward_trap_mask(seeds: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Vectorized inward-trap-vertex test (2D, four exclusive corner cases)."""
    uy = _line_signs(seeds, 0, [Y])
    uym = _line_signs(seeds, 0, [Y - 1])
    uyp = _line_signs(seeds, 0, [Y + 1])
    vx = _line_signs(seeds, 1, [X])
    vxm = _line_signs(seeds, 1, [X - 1])
    vxp = _line_signs(seeds, 1, [X + 1])
    ne = (uy == 1) & (vx == 1) & (uyp == -1) & (vxp == -1)
    sw = (uym == 1) & (vxm == 1) & (uy == -1) & (vx == -1)
    nw = (uy == -1) & (vx == 1) & (uyp == 1) & (vxm == -1)
    se = (uy == 1) & (vx == -1) & (uym == -1) & (vxp == 1)
    return ne | sw | nw | se


@dataclass
class BatchArrays:
    """Per-walk results of one vectorized 2D batch."""

    absorbed: np.ndarray
    period: np.ndarray
    steps: np.ndarray
    max_sup: np.ndarray
    max_euclid_sq: np.ndarray
    T: np.ndarray            # first n with X_{n+1} = X_n - 1, or -1
    trap_at_T: np.ndarray
    N: np.ndarray            # finite eastward renewals beyond the first
    d_minus: np.ndarray
    d_plus: np.ndarray


def _batch_walk_2d(seeds: np.ndarray, budget: int) -> BatchArrays:
    """Step all walks together until each one's cycle is detected.

    Detection compares against a position snapshot refreshed on a
    doubling schedule: once the snapshot falls inside the terminal
    cycle, the first later equality yields the exact period. The
    eastward-renewal state machine runs alongside: a leftward step ends
    a discovery interval, a step one past the running maximum begins
    the next one.
    """
    m = len(seeds)
    out = BatchArrays(
        absorbed=np.zeros(m, dtype=bool),
        period=np.full(m, -1, dtype=np.int64),
        steps=np.zeros(m, dtype=np.int64),
        max_sup=np.zeros(m, dtype=np.int64),
        max_euclid_sq=np.zeros(m, dtype=np.int64),
        T=np.full(m, -1, dtype=np.int64),
        trap_at_T=np.zeros(m, dtype=bool),
        N=np.zeros(m, dtype=np.int64),
        d_minus=np.zeros(m, dtype=np.int64),
        d_plus=np.zeros(m, dtype=np.int64),
    )
    if m == 0:
        return out

    idx = np.arange(m)
    sd = seeds.copy()
    X = np.zeros(m, dtype=np.int64)
    Y = np.zeros(m, dtype=np.int64)
    snap_x = X.copy()
    snap_y = Y.copy()
    snap_step = np.zeros(m, dtype=np.int64)
    next_snap = np.ones(m, dtype=np.int64)
    max_sup = np.zeros(m, dtype=np.int64)
    max_r2 = np.zeros(m, dtype=np.int64)
    max_x = np.zeros(m, dtype=np.int64)
    d_minus = np.zeros(m, dtype=np.int64)
    d_plus = np.zeros(m, dtype=np.int64)
    t_idx = np.full(m, -1, dtype=np.int64)
    trap_t = np.zeros(m, dtype=bool)
    n_count = np.ones(m, dtype=np.int64)  # completed eastward discoveries
    phase_b = np.zeros(m, dtype=bool)     # True between T_r and the next S

    for k in range(1, budget + 1):
        u = _line_signs(sd, 0, [Y])
        v = _line_signs(sd, 1, [X])
        nx = X + u
        ny = Y + v

        left = u == -1
        fresh_t = left & (t_idx < 0)
        if fresh_t.any():
            t_idx[fresh_t] = k - 1
            sub = np.nonzero(fresh_t)[0]
            trap_t[sub] = _inward_trap_mask(sd[sub], X[sub], Y[sub])

        discovery = (~left) & (nx > max_x) & phase_b
        n_count[discovery] += 1
        phase_b = (phase_b | left) & ~discovery
        np.maximum(max_x, nx, out=max_x)

        hit = (nx == snap_x) & (ny == snap_y)
        if hit.any():
            done = np.nonzero(hit)[0]
            gi = idx[done]
            out.absorbed[gi] = True
            out.period[gi] = k - snap_step[done]
            out.steps[gi] = k
            out.max_sup[gi] = max_sup[done]
            out.max_euclid_sq[gi] = max_r2[done]
            out.T[gi] = t_idx[done]
            out.trap_at_T[gi] = trap_t[done]
            out.N[gi] = n_count[done] - 1
            out.d_minus[gi] = d_minus[done]
            out.d_plus[gi] = d_plus[done]

        keep = ~hit
        sup = np.maximum(np.abs(nx), np.abs(ny))
        np.maximum(max_sup, sup, out=max_sup)
        np.maximum(max_r2, nx * nx + ny * ny, out=max_r2)
        np.maximum(d_plus, ny, out=d_plus)
        np.maximum(d_minus, -ny, out=d_minus)

        do_snap = (k == next_snap) & keep
        if do_snap.any():
            snap_x[do_snap] = nx[do_snap]
            snap_y[do_snap] = ny[do_snap]
            snap_step[do_snap] = k
            next_snap[do_snap] *= 2

        if hit.any():
            idx = idx[keep]
            if len(idx) == 0:
                return out
            sd = sd[keep]
            X = nx[keep]
            Y = ny[keep]
            snap_x = snap_x[keep]
            snap_y = snap_y[keep]
            snap_step = snap_step[keep]
            next_snap = next_snap[keep]
            max_sup = max_sup[keep]
            max_r2 = max_r2[keep]
            max_x = max_x[keep]
            d_minus = d_minus[keep]
            d_plus = d_plus[keep]
            t_idx = t_idx[keep]
            trap_t = trap_t[keep]
            n_count = n_count[keep]
            phase_b = phase_b[keep]
        else:
            X = nx
            Y = ny

    # budget exhausted for the remaining walks
    out.steps[idx] = budget
    out.max_sup[idx] = max_sup
    out.max_euclid_sq[idx] = max_r2
    out.T[idx] = t_idx
    out.trap_at_T[idx] = trap_t
    out.N[idx] = n_count - 1
    out.d_minus[idx] = d_minus
    out.d_plus[idx] = d_plus
    return out


def _batch_walk_3d(seeds: np.ndarray, budget: int):
    """3D batch walker: absorption and exact periods only."""
    m = len(seeds)
    absorbed = np.zeros(m, dtype=bool)
    period = np.full(m, -1, dtype=np.int64)
    steps = np.zeros(m, dtype=np.int64)
    max_sup = np.zeros(m, dtype=np.int64)
    if m == 0:
        return absorbed, period, steps, max_sup

    idx = np.arange(m)
    sd = seeds.copy()
    X = np.zeros(m, dtype=np.int64)
    Y = np.zeros(m, dtype=np.int64)
    Z = np.zeros(m, dtype=np.int64)
    snap = [X.copy(), Y.copy(), Z.copy()]
    snap_step = np.zeros(m, dtype=np.int64)
    next_snap = np.ones(m, dtype=np.int64)
    sup = np.zeros(m, dtype=np.int64)

    for k in range(1, budget + 1):
        dx = _line_signs(sd, 0, [Y, Z])
        dy = _line_signs(sd, 1, [Z, X])
        dz = _line_signs(sd, 2, [X, Y])
        X = X + dx
        Y = Y + dy
        Z = Z + dz
        hit = (X == snap[0]) & (Y == snap[1]) & (Z == snap[2])
        np.maximum(sup, np.abs(X), out=sup)
        np.maximum(sup, np.abs(Y), out=sup)
        np.maximum(sup, np.abs(Z), out=sup)
        if hit.any():
            done = np.nonzero(hit)[0]
            gi = idx[done]
            absorbed[gi] = True
            period[gi] = k - snap_step[done]
            steps[gi] = k
            max_sup[gi] = sup[done]
        do_snap = (k == next_snap) & ~hit
        if do_snap.any():
            snap[0][do_snap] = X[do_snap]
            snap[1][do_snap] = Y[do_snap]
            snap[2][do_snap] = Z[do_snap]
            snap_step[do_snap] = k
            next_snap[do_snap] *= 2
        if hit.any():
            keep = ~hit
            idx = idx[keep]
            if len(idx) == 0:
                return absorbed, period, steps, max_sup
            sd = sd[keep]
            X = X[keep]
            Y = Y[keep]
            Z = Z[keep]
            snap = [s[keep] for s in snap]
            snap_step = snap_step[keep]
            next_snap = next_snap[keep]
            sup = sup[keep]

    steps[idx] = budget
    max_sup[idx] = sup
    return absorbed, period, steps, max_sup


DEFAULT_CHUNK = 1 << 16


def _chunks(count: int, chunk: int):
    return [(start, min(chunk, count - start)) for start in range(0, count, chunk)]


def _walk_chunk_2d(args):
    master_seed, start, size, budget = args
    seeds = _derive_seeds(master_seed, start, size)
    return _batch_walk_2d(seeds, budget)


def _walk_chunk_3d(args):
    master_seed, start, size, budget = args
    seeds = _derive_seeds(master_seed, start, size)
    return _batch_walk_3d(seeds, budget)


def _map_chunks(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=1))


def gather_walks(master_seed: int, count: int, budget: int, *, dimension: int = 2,
                 workers: int = 1, chunk: int = DEFAULT_CHUNK):
    """Run ``count`` independent seeded walks; concatenated per-walk arrays.

    The chunk layout is fixed by ``chunk`` alone, so results are
    identical for any worker count.
    """
    jobs = [(master_seed, start, size, budget) for start, size in _chunks(count, chunk)]
    if dimension == 2:
        parts = _map_chunks(_walk_chunk_2d, jobs, workers)
        return BatchArrays(**{
            name: np.concatenate([getattr(p, name) for p in parts])
            for name in BatchArrays.__dataclass_fields__
        })
    if dimension == 3:
        parts = _map_chunks(_walk_chunk_3d, jobs, workers)
        absorbed, period, steps, max_sup = (np.concatenate(x) for x in zip(*parts))
        return absorbed, period, steps, max_sup
    raise ValueError("dimension must be 2 or 3")


@dataclass(frozen=True)
class SampleSummary:
    master_seed: int
    dimension: int
    count: int
    budget: int
    censored: int
    period_histogram: dict[int, int]
    mean_steps: float
    max_sup_max: int

    def as_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "dimension": self.dimension,
            "count": self.count,
            "budget": self.budget,
            "censored": self.censored,
            "period_histogram": {str(k): v for k, v in sorted(self.period_histogram.items())},
            "mean_steps": self.mean_steps,
            "max_sup_max": self.max_sup_max,
        }


def sample_walks(master_seed: int, count: int, budget: int, *, dimension: int = 2,
                 workers: int = 1, chunk: int = DEFAULT_CHUNK) -> SampleSummary:
    """Deterministic summary of ``count`` seeded walks."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if dimension == 2:
        arrs = gather_walks(master_seed, count, budget, dimension=2, workers=workers, chunk=chunk)
        absorbed, period, steps, max_sup = arrs.absorbed, arrs.period, arrs.steps, arrs.max_sup
    else:
        absorbed, period, steps, max_sup = gather_walks(
            master_seed, count, budget, dimension=dimension, workers=workers, chunk=chunk)
    vals, cnts = np.unique(period[absorbed], return_counts=True)
    return SampleSummary(
        master_seed=master_seed,
        dimension=dimension,
        count=count,
        budget=budget,
        censored=int((~absorbed).sum()),
        period_histogram={int(v): int(c) for v, c in zip(vals, cnts)},
        mean_steps=float(steps.mean()),
        max_sup_max=int(max_sup.max()),
    )


def _ci_half_width(successes: int, n: int, z: float = 1.96) -> float:
    """Binomial CI half-width: normal approximation, Wilson for sparse bins."""
    if n == 0:
        return 1.0
    p = successes / n
    if min(successes, n - successes) >= 10:
        return z * math.sqrt(p * (1.0 - p) / n)
    denom = 1.0 + z * z / n
    return (z / denom) * math.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n))


@dataclass(frozen=True)
class TailCurve:
    master_seed: int
    count: int
    budget: int
    thresholds: tuple[int, ...]
    exceed_counts: tuple[int, ...]
    censored: int
    norm: str = "sup"

    @property
    def survival(self) -> tuple[float, ...]:
        return tuple(c / self.count for c in self.exceed_counts)

    @property
    def ci_half(self) -> tuple[float, ...]:
        return tuple(_ci_half_width(c, self.count) for c in self.exceed_counts)

    def to_csv(self) -> str:
        lines = ["n,p_hat,ci_half,exceed_count,count,censored"]
        for n, c, p, h in zip(self.thresholds, self.exceed_counts, self.survival, self.ci_half):
            lines.append(f"{n},{p!r},{h!r},{c},{self.count},{self.censored}")
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "count": self.count,
            "budget": self.budget,
            "norm": self.norm,
            "thresholds": list(self.thresholds),
            "exceed_counts": list(self.exceed_counts),
            "survival": list(self.survival),
            "ci_half": list(self.ci_half),
            "censored": self.censored,
        }


def tail_curve(master_seed: int, thresholds, count: int, budget: int, *,
               workers: int = 1, chunk: int = DEFAULT_CHUNK, norm: str = "sup") -> TailCurve:
    """Survival estimates of the trajectory extent at each threshold.

    ``norm`` switches the recorded extent between sup-norm (default)
    and Euclidean (sensitivity checks only).
    """
    thresholds = tuple(int(n) for n in thresholds)
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be sorted ascending")
    arrs = gather_walks(master_seed, count, budget, dimension=2, workers=workers, chunk=chunk)
    if norm == "sup":
        extent = arrs.max_sup.astype(np.float64)
    elif norm == "euclid":
        extent = np.sqrt(arrs.max_euclid_sq.astype(np.float64))
    else:
        raise ValueError("norm must be 'sup' or 'euclid'")
    counts = tuple(int((extent > n).sum()) for n in thresholds)
    return TailCurve(
        master_seed=master_seed,
        count=count,
        budget=budget,
        thresholds=thresholds,
        exceed_counts=counts,
        censored=int((~arrs.absorbed).sum()),
        norm=norm,
    )


@dataclass(frozen=True)
class StretchedExponentialFit:
    beta: float
    c: float
    points_used: int
    threshold_range: tuple[int, int]
    residual_rms: float


def fit_stretched_exponential(thresholds, survival, *, min_count_p=None) -> StretchedExponentialFit:
    """Least squares for p(n) ~ exp(-c n^beta): slope of log(-log p)
    against log n. Only thresholds with p strictly inside (0, 1) enter.
    """
    xs: list[float] = []
    ys: list[float] = []
    used: list[int] = []
    for n, p in zip(thresholds, survival):
        if 0.0 < p < 1.0 and n > 0:
            xs.append(math.log(n))
            ys.append(math.log(-math.log(p)))
            used.append(n)
    if len(xs) < 4:
        raise ValueError("need at least 4 usable points to fit")
    x = np.asarray(xs)
    y = np.asarray(ys)
    beta, logc = np.polyfit(x, y, 1)
    resid = y - (beta * x + logc)
    return StretchedExponentialFit(
        beta=float(beta),
        c=float(math.exp(logc)),
        points_used=len(xs),
        threshold_range=(min(used), max(used)),
        residual_rms=float(np.sqrt(np.mean(resid ** 2))),
    )


@dataclass(frozen=True)
class RenewalReport:
    master_seed: int
    count: int
    budget: int
    censored: int
    t_zero: int
    t_ge1: int
    trap_at_t_ge1: int
    trap_at_t_all: int
    p_trap_given_t_ge1: float
    p_trap_all: float
    t_finite_fraction: float
    n_histogram: dict[int, int]
    mean_d_minus: float
    mean_d_plus: float

    def as_dict(self) -> dict:
        d = self.__dict__.copy()
        d["n_histogram"] = {str(k): v for k, v in sorted(self.n_histogram.items())}
        return d


def renewal_stats(master_seed: int, count: int, budget: int, *,
                  workers: int = 1, chunk: int = DEFAULT_CHUNK) -> RenewalReport:
    """Stopping-time statistics of eastward line discovery.

    The T = 0 walks (first horizontal line already points left) carry no
    arrival edge, so the one-half trap probability is reported
    conditional on T >= 1; the unconditional estimate is kept alongside
    (its exact value is 3/8: one quarter on T = 0, one half after).
    """
    arrs = gather_walks(master_seed, count, budget, dimension=2, workers=workers, chunk=chunk)
    t_finite = arrs.T >= 0
    t_zero = int((arrs.T == 0).sum())
    ge1 = t_finite & (arrs.T >= 1)
    trap_ge1 = int((arrs.trap_at_T & ge1).sum())
    trap_all = int((arrs.trap_at_T & t_finite).sum())
    vals, cnts = np.unique(arrs.N[arrs.absorbed], return_counts=True)
    return RenewalReport(
        master_seed=master_seed,
        count=count,
        budget=budget,
        censored=int((~arrs.absorbed).sum()),
        t_zero=t_zero,
        t_ge1=int(ge1.sum()),
        trap_at_t_ge1=trap_ge1,
        trap_at_t_all=trap_all,
        p_trap_given_t_ge1=trap_ge1 / max(1, int(ge1.sum())),
        p_trap_all=trap_all / max(1, int(t_finite.sum())),
        t_finite_fraction=float(t_finite.mean()),
        n_histogram={int(v): int(c) for v, c in zip(vals, cnts)},
        mean_d_minus=float(arrs.d_minus.mean()),
        mean_d_plus=float(arrs.d_plus.mean()),
    )


@dataclass(frozen=True)
class RenewalRecord:
    """Scalar renewal decomposition of one absorbed walk.

    ``T`` is detected both ways: by the characterization
    X_{n+1} = X_n - 1 and by the literal rule (new vertical line met
    while the horizontal line points left); they must agree, and the
    mismatch is an assertion error. ``intervals`` holds the (S_r, T_r)
    discovery intervals; L_r = T_r - S_r = X_{T_r} - X_{S_r}.
    """

    T: int | None
    Z_T: tuple[int, int] | None
    trap_at_T: bool
    intervals: tuple[tuple[int, int], ...]
    N: int
    d_minus: int
    d_plus: int


def renewal_record(env, budget: int) -> RenewalRecord:
    """Walk from the origin and decompose it into eastward discoveries.

    Pure-python path used for hand fixtures and as the slow cross-check
    of the vectorized engine.
    """
    from .graph import classify_vertex

    xs = [0]
    ys = [0]
    pos = (0, 0)
    seen = {pos}
    for _ in range(budget):
        pos = (pos[0] + env.u(pos[1]), pos[1] + env.v(pos[0]))
        if pos in seen:
            xs.append(pos[0])
            ys.append(pos[1])
            break
        seen.add(pos)
        xs.append(pos[0])
        ys.append(pos[1])
    else:
        raise RuntimeError("walk not absorbed within budget")

    # absorbed: continue two more steps so every T_r inside is visible
    for _ in range(2):
        pos = (pos[0] + env.u(pos[1]), pos[1] + env.v(pos[0]))
        xs.append(pos[0])
        ys.append(pos[1])

    last = len(xs) - 2
    t_char = None
    for n in range(last + 1):
        if xs[n + 1] == xs[n] - 1:
            t_char = n
            break
    t_literal = None
    running_min, running_max = None, None
    for n in range(last + 1):
        is_new = running_min is None or not running_min <= xs[n] <= running_max
        if is_new and env.u(ys[n]) == -1:
            t_literal = n
            break
        running_min = xs[n] if running_min is None else min(running_min, xs[n])
        running_max = xs[n] if running_max is None else max(running_max, xs[n])
    assert t_char == t_literal, (t_char, t_literal)

    prefix_max = []
    m = xs[0]
    for x in xs:
        m = max(m, x)
        prefix_max.append(m)
    intervals: list[tuple[int, int]] = []
    if t_char is not None:
        s_r = 0
        while True:
            t_r = next((j for j in range(s_r, last + 1) if xs[j + 1] == xs[j] - 1), None)
            if t_r is None:
                break
            intervals.append((s_r, t_r))
            s_next = next((j for j in range(t_r, last + 1)
                           if xs[j + 1] == prefix_max[j] + 1), None)
            if s_next is None:
                break
            s_r = s_next

    z_t = (xs[t_char], ys[t_char]) if t_char is not None else None
    trap = bool(z_t is not None and classify_vertex(env, z_t).inward_trap)
    return RenewalRecord(
        T=t_char,
        Z_T=z_t,
        trap_at_T=trap,
        intervals=tuple(intervals),
        N=max(0, len(intervals) - 1) if intervals else 0,
        d_minus=-min(ys),
        d_plus=max(ys),
    )


def _sizebias_chunk(args):
    master_seed, start, size, max_members, max_radius = args
    caps = ComponentCaps(max_members=max_members, max_radius=max_radius)
    sizes = np.zeros(size, dtype=np.int64)
    diams = np.zeros(size, dtype=np.int64)
    basins = np.zeros(size, dtype=np.int64)
    is_trap = np.zeros(size, dtype=bool)
    truncated = np.zeros(size, dtype=bool)
    for j in range(size):
        env = make_env(2, seed=derive_seed(master_seed, start + j))
        comp = component(env, (0, 0), caps)
        sizes[j] = comp.size
        diams[j] = comp.diameter
        truncated[j] = comp.truncated
        if comp.trap is not None and comp.origin == comp.trap[0]:
            is_trap[j] = True
            basins[j] = comp.basin_of_origin
    return sizes, diams, basins, is_trap, truncated


@dataclass(frozen=True)
class SizeBiasReport:
    """Both sides of the size-bias identity plus supporting statistics.

    ``lhs`` is the mean component size over environments. ``rhs`` is the
    size-biased estimator: component size times the count of vertices
    whose walk is absorbed at the origin, on the event that the origin
    is an inward trap vertex. Each trap has two inward vertices whose
    absorption counts split the component, which makes this estimator
    exactly unbiased for ``lhs``; the literal squared variant
    double-counts per trap and is reported for reference (it converges
    to twice the mean size).
    """

    master_seed: int
    count: int
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float
    rhs_squared: float
    rhs_squared_se: float
    p_trap_origin: float
    mean_basin_on_trap: float
    truncated_count: int
    size_histogram: dict[int, int] = field(repr=False, default_factory=dict)
    diam_histogram: dict[int, int] = field(repr=False, default_factory=dict)

    @property
    def combined_se(self) -> float:
        return math.sqrt(self.lhs_se ** 2 + self.rhs_se ** 2)

    def as_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "count": self.count,
            "lhs": self.lhs,
            "lhs_se": self.lhs_se,
            "rhs": self.rhs,
            "rhs_se": self.rhs_se,
            "rhs_squared": self.rhs_squared,
            "rhs_squared_se": self.rhs_squared_se,
            "p_trap_origin": self.p_trap_origin,
            "mean_basin_on_trap": self.mean_basin_on_trap,
            "truncated_count": self.truncated_count,
            "size_histogram": {str(k): v for k, v in sorted(self.size_histogram.items())},
            "diam_histogram": {str(k): v for k, v in sorted(self.diam_histogram.items())},
        }


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    mean = float(x.mean())
    if len(x) < 2:
        return mean, 0.0
    return mean, float(x.std(ddof=1) / math.sqrt(len(x)))


def size_bias_check(master_seed: int, count: int, caps: ComponentCaps | None = None, *,
                    workers: int = 1, chunk: int = 4096) -> SizeBiasReport:
    caps = caps or ComponentCaps()
    jobs = [(master_seed, start, size, caps.max_members, caps.max_radius)
            for start, size in _chunks(count, chunk)]
    parts = _map_chunks(_sizebias_chunk, jobs, workers)
    sizes, diams, basins, is_trap, truncated = (np.concatenate(x) for x in zip(*parts))
    lhs, lhs_se = _mean_se(sizes.astype(np.float64))
    rhs_terms = np.where(is_trap, sizes * basins, 0).astype(np.float64)
    rhs, rhs_se = _mean_se(rhs_terms)
    sq_terms = np.where(is_trap, sizes * sizes, 0).astype(np.float64)
    sq, sq_se = _mean_se(sq_terms)
    sv, sc = np.unique(sizes, return_counts=True)
    dv, dc = np.unique(diams, return_counts=True)
    return SizeBiasReport(
        master_seed=master_seed,
        count=count,
        lhs=lhs,
        lhs_se=lhs_se,
        rhs=rhs,
        rhs_se=rhs_se,
        rhs_squared=sq,
        rhs_squared_se=sq_se,
        p_trap_origin=float(is_trap.mean()),
        mean_basin_on_trap=float(np.where(is_trap, basins, 0).mean()),
        truncated_count=int(truncated.sum()),
        size_histogram={int(v): int(c) for v, c in zip(sv, sc)},
        diam_histogram={int(v): int(c) for v, c in zip(dv, dc)},
    )


@dataclass(frozen=True)
class Search3DConfig:
    master_seed: int = 3
    samples: int = 1_000_000
    budget: int = 100_000
    start_range: int = 0
    chunk: int = DEFAULT_CHUNK
    max_certificates: int = 8


@dataclass(frozen=True)
class CycleCertificate3D:
    seed: int
    sample_index: int
    start: tuple[int, int, int]
    period: int
    cycle: tuple[tuple[int, int, int], ...]
    tables: dict

    def as_dict(self) -> dict:
        return {
            "dimension": 3,
            "seed": self.seed,
            "sample_index": self.sample_index,
            "start": list(self.start),
            "period": self.period,
            "cycle": [list(v) for v in self.cycle],
            "tables": self.tables,
        }


@dataclass(frozen=True)
class Search3DReport:
    config: Search3DConfig
    tested: int
    censored: int
    nontrivial_found: int
    certificates: tuple[CycleCertificate3D, ...]
    box2_exhaustive_nontrivial: int
    box2_assignments: int

    def as_dict(self) -> dict:
        return {
            "master_seed": self.config.master_seed,
            "samples": self.config.samples,
            "budget": self.config.budget,
            "tested": self.tested,
            "censored": self.censored,
            "nontrivial_found": self.nontrivial_found,
            "certificates": [c.as_dict() for c in self.certificates],
            "box2_exhaustive_nontrivial": self.box2_exhaustive_nontrivial,
            "box2_assignments": self.box2_assignments,
        }


def _cycle_line_tables(env, cycle) -> dict:
    """Explicit line values a replay of ``cycle`` will query."""
    tables: dict[int, dict] = {0: {}, 1: {}, 2: {}}
    for v in cycle:
        for axis in range(3):
            key = env.line_key(axis, v)
            tables[axis][key] = env.orientation(axis, key)
    return {
        str(axis): {",".join(map(str, k)): val for k, val in entries.items()}
        for axis, entries in tables.items()
    }


def tables_from_certificate(doc_tables: dict) -> dict:
    return {
        int(axis): {tuple(int(c) for c in key.split(",")): val
                    for key, val in entries.items()}
        for axis, entries in doc_tables.items()
    }


def _extract_certificate_3d(seed: int, index: int, budget: int) -> CycleCertificate3D | None:
    env = make_env(3, seed=seed)
    out = run(env, (0, 0, 0), budget)
    if not out.absorbed or out.period is None or out.period <= 2:
        return None
    cyc = out.cycle_vertices
    return CycleCertificate3D(
        seed=seed,
        sample_index=index,
        start=cyc[0],
        period=out.period,
        cycle=cyc,
        tables=_cycle_line_tables(env, cyc),
    )


def replay_certificate_3d(cert: CycleCertificate3D) -> bool:
    """Re-run the certified cycle in a strict explicit environment."""
    env = make_env(3, tables=tables_from_certificate(cert.tables), strict=True)
    out = run(env, tuple(cert.start), 4 * cert.period + 4)
    return bool(out.absorbed and out.period == cert.period and out.cycle_entry == 0
                and set(out.cycle_vertices) == set(tuple(v) for v in cert.cycle))


def exhaustive_box2_search() -> tuple[int, int]:
    """Definitive small-box oracle: every orientation assignment of the
    twelve lines meeting {0,1}^3, walked from all eight box vertices.

    Returns (assignments tested, cycles of period > 2 fully inside the
    box). Inside the box every coordinate is forced to toggle between 0
    and 1, so the expected answer is zero; the enumeration proves it.
    """
    keys = [(a, b) for a in (0, 1) for b in (0, 1)]
    starts = [(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)]
    nontrivial = 0
    assignments = 0
    for bits in range(1 << 12):
        assignments += 1
        vals = [1 if (bits >> i) & 1 else -1 for i in range(12)]
        tables = {
            0: {k: vals[i] for i, k in enumerate(keys)},
            1: {k: vals[4 + i] for i, k in enumerate(keys)},
            2: {k: vals[8 + i] for i, k in enumerate(keys)},
        }
        env = make_env(3, tables=tables, strict=True)
        for start in starts:
            try:
                out = run(env, start, 32)
            except KeyError:
                continue  # walk left the box: not a fully-inside cycle
            if (out.absorbed and out.period and out.period > 2
                    and all(v in starts for v in out.cycle_vertices)):
                nontrivial += 1
    return assignments, nontrivial


def find_nontrivial_cycle_3d(config: Search3DConfig) -> Search3DReport:
    """Search seeded 3D environments for walk cycles of period > 2.

    Randomized search over derived seeds (each sample is a fresh
    environment walked from the origin, which by translation invariance
    is equivalent to varying the start), plus the exhaustive 2x2x2
    answer. Every hit is replayed from an explicit window before being
    certified.
    """
    assignments, box2 = exhaustive_box2_search()
    certificates: list[CycleCertificate3D] = []
    tested = 0
    censored = 0
    found = 0
    for start, size in _chunks(config.samples, config.chunk):
        seeds = _derive_seeds(config.master_seed, start, size)
        absorbed, period, _steps, _sup = _batch_walk_3d(seeds, config.budget)
        tested += size
        censored += int((~absorbed).sum())
        hits = np.nonzero(absorbed & (period > 2))[0]
        for j in hits:
            found += 1
            if len(certificates) < config.max_certificates:
                cert = _extract_certificate_3d(
                    derive_seed(config.master_seed, start + int(j)), start + int(j),
                    config.budget)
                if cert is not None and replay_certificate_3d(cert):
                    certificates.append(cert)
        if certificates and found >= config.max_certificates:
            break
    return Search3DReport(
        config=config,
        tested=tested,
        censored=censored,
        nontrivial_found=found,
        certificates=tuple(certificates),
        box2_exhaustive_nontrivial=box2,
        box2_assignments=assignments,
    )
