import math
from fractions import Fraction

import numpy as np
import pytest

from manhattan.srw import (
    check_bounds,
    phi,
    survival,
    survival_by_enumeration,
    survival_counts,
    survival_table_csv,
)


def test_phi_value_at_two():
    assert phi(2) == pytest.approx(math.log(math.sqrt(2)), rel=1e-12)


def test_phi_asymptotic():
    L = 1000
    assert phi(L) * L * L == pytest.approx(math.pi ** 2 / 8, rel=1e-3)


def test_phi_monotone_decreasing():
    values = [phi(L) for L in range(2, 40)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_phi_rejects_small_L():
    with pytest.raises(ValueError):
        phi(1)


def test_survival_hand_values():
    assert survival(2, 0) == 1
    assert survival(2, 1) == 1
    assert survival(2, 2) == Fraction(1, 2)
    assert survival(2, 4) == Fraction(1, 4)


def test_survival_matches_enumeration():
    for L in (2, 3, 4):
        counts = list(survival_counts(L, 12))
        for n in range(13):
            assert Fraction(counts[n], 1 << n) == survival_by_enumeration(L, n)


def test_survival_monotone_in_n_and_L():
    for L in (2, 3, 5, 9):
        vals = [Fraction(c, 1 << n) for n, c in enumerate(survival_counts(L, 60))]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
    for n in (5, 20, 51):
        by_L = [survival(L, n) for L in (2, 3, 4, 6, 10)]
        assert all(a <= b for a, b in zip(by_L, by_L[1:]))


def test_bounds_small_sweep():
    for L in (2, 3, 4, 8, 16):
        rep = check_bounds(L, 2000)
        assert rep.holds
        assert rep.worst_lower_margin >= 0.0
        assert rep.worst_upper_margin >= 0.0


def test_bound_example_L2_n2():
    # e^{-2 phi(2)} = 1/2 <= P = 1/2 <= 2 * 1/2 = 1, with exact ties
    rep = check_bounds(2, 2)
    assert rep.holds
    assert rep.worst_lower_margin == 0.0


def test_monte_carlo_cross_check():
    L, n, paths = 8, 100, 100_000
    rng = np.random.default_rng(7)
    steps = rng.choice(np.array([-1, 1], dtype=np.int8), size=(paths, n))
    pos = np.cumsum(steps, axis=1)
    alive = (np.abs(pos) < L).all(axis=1)
    p_hat = alive.mean()
    p_exact = float(survival(L, n))
    sigma = math.sqrt(p_exact * (1 - p_exact) / paths)
    assert abs(p_hat - p_exact) <= 3 * sigma


def test_csv_table():
    text = survival_table_csv([2], [0, 2])
    lines = text.strip().split("\n")
    assert lines[0] == "L,n,survival,lower_bound,upper_bound"
    assert lines[1].startswith("2,0,1")
    assert lines[2].startswith("2,2,0.5,")
