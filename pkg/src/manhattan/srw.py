"""Exact exit-time distribution of the symmetric simple random walk.

For the walk started at 0, tau_L is the first time it leaves (-L, L).
Survival probabilities are computed exactly as integer path counts over
the 2L-1 interior states divided by 2^n, and compared against the
two-sided bound  e^{-n phi(L)} <= P(tau_L > n) <= L e^{-n phi(L)}  with
phi(L) = -log cos(pi/(2L)).  The lower bound is attained exactly at
L = 2 and even n, so the comparison logic must not rely on floating
point alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import mpmath


def phi(L: int) -> float:
    """Decay rate -log cos(pi / (2L)); ~ pi^2 / (8 L^2) for large L."""
    if L < 2:
        raise ValueError("need L >= 2")
    return -math.log(math.cos(math.pi / (2 * L)))


def survival_counts(L: int, n_max: int) -> Iterator[int]:
    """Yields, for n = 0..n_max, the number of n-step +-1 paths from 0
    that stay strictly inside (-L, L). P(tau_L > n) is count / 2^n."""
    if L < 2:
        raise ValueError("need L >= 2")
    if n_max < 0:
        raise ValueError("need n_max >= 0")
    width = 2 * L - 1  # states -L+1 .. L-1
    c = [0] * width
    c[L - 1] = 1
    yield 1
    for _ in range(n_max):
        nxt = [0] * width
        for j, cj in enumerate(c):
            if not cj:
                continue
            if j > 0:
                nxt[j - 1] += cj
            if j < width - 1:
                nxt[j + 1] += cj
        c = nxt
        yield sum(c)


def survival(L: int, n: int) -> Fraction:
    """Exact P(tau_L > n)."""
    count = 0
    for count in survival_counts(L, n):
        pass
    return Fraction(count, 1 << n)


@dataclass(frozen=True)
class BoundReport:
    L: int
    n_max: int
    holds: bool
    worst_lower_margin: float  # min over n of log P - (-n phi), >= 0 iff bound holds
    worst_upper_margin: float  # min over n of log L - (log P + n phi)
    violations: tuple[int, ...] = ()
    exact_ties: int = 0


def _log_int(c: int) -> float:
    """Natural log of a positive big integer at float precision."""
    if c.bit_length() <= 900:
        return math.log(c)
    shift = c.bit_length() - 64
    return math.log(c >> shift) + shift * math.log(2)


def _confirm_close_call(L: int, n: int, count: int, side: str) -> bool:
    """Exact or high-precision decision when a float margin is too close
    to zero to trust. Returns True when the bound holds at (L, n)."""
    if L in (2, 3):
        # cos^2(pi/(2L)) is rational (1/2 and 3/4): compare squares exactly.
        c2 = Fraction(1, 2) if L == 2 else Fraction(3, 4)
        p2 = Fraction(count * count, 1 << (2 * n))
        if side == "lower":
            return p2 >= c2 ** n
        return p2 <= L * L * c2 ** n
    with mpmath.workdps(80):
        log_p = mpmath.log(count) - n * mpmath.log(2)
        log_bound = n * mpmath.log(mpmath.cos(mpmath.pi / (2 * L)))
        if side == "lower":
            diff = log_p - log_bound
        else:
            diff = mpmath.log(L) + log_bound - log_p
        if abs(diff) < mpmath.mpf("1e-50"):
            raise ArithmeticError(f"unresolved tie at L={L}, n={n}")
        return diff > 0


def check_bounds(L: int, n_max: int) -> BoundReport:
    """Verify both exit-time bounds for every n <= n_max at this L."""
    ph = phi(L)
    ln2 = math.log(2)
    lnL = math.log(L)
    worst_low = math.inf
    worst_up = math.inf
    violations: list[int] = []
    ties = 0
    for n, count in enumerate(survival_counts(L, n_max)):
        if count == 0:
            violations.append(n)  # lower bound e^{-n phi} > 0 always
            continue
        if n == 0:
            # P = 1 = e^{-0 phi}: the lower bound is an exact tie here
            worst_low = min(worst_low, 0.0)
            worst_up = min(worst_up, lnL)
            continue
        log_p = _log_int(count) - n * ln2
        low = log_p + n * ph
        up = lnL - low
        if low < 1e-9:
            ties += 1
            if not _confirm_close_call(L, n, count, "lower"):
                violations.append(n)
            low = max(low, 0.0)
        if up < 1e-9:
            ties += 1
            if not _confirm_close_call(L, n, count, "upper"):
                violations.append(n)
            up = max(up, 0.0)
        worst_low = min(worst_low, low)
        worst_up = min(worst_up, up)
    return BoundReport(
        L=L,
        n_max=n_max,
        holds=not violations,
        worst_lower_margin=worst_low,
        worst_upper_margin=worst_up,
        violations=tuple(violations),
        exact_ties=ties,
    )


def survival_by_enumeration(L: int, n: int) -> Fraction:
    """Brute-force oracle: walk every one of the 2^n sign sequences."""
    alive = 0
    for bits in range(1 << n):
        s = 0
        for k in range(n):
            s += 1 if (bits >> k) & 1 else -1
            if abs(s) >= L:
                break
        else:
            alive += 1
    return Fraction(alive, 1 << n)


def survival_table_csv(L_values, n_values) -> str:
    """CSV rows (L, n, survival, lower_bound, upper_bound)."""
    lines = ["L,n,survival,lower_bound,upper_bound"]
    for L in L_values:
        needed = max(n_values)
        counts = list(survival_counts(L, needed))
        ph = phi(L)
        for n in n_values:
            p = counts[n] / (1 << n) if counts[n].bit_length() < 900 else math.exp(
                _log_int(counts[n]) - n * math.log(2))
            lines.append(f"{L},{n},{p!r},{math.exp(-n * ph)!r},{(L * math.exp(-n * ph))!r}")
    return "\n".join(lines) + "\n"
