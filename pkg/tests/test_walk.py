import pytest

from manhattan.env import CoordinateOverflowError, make_env
from manhattan.walk import EXHAUSTED, run, step, trajectory_vertices


def plus_env(radius=300):
    rng = range(-radius, radius + 1)
    return make_env(2, tables={0: {y: 1 for y in rng}, 1: {x: 1 for x in rng}}, strict=True)


def trap_example_env(seed=None):
    """U = V = (+1, +1, +1, -1, -1) on indices -1..3: one trap at cell (1,1)."""
    t = {-1: 1, 0: 1, 1: 1, 2: -1, 3: -1}
    return make_env(2, tables={0: dict(t), 1: dict(t)}, strict=seed is None, seed=seed)


def test_step_direct_substitution():
    env = make_env(2, tables={0: {0: 1}, 1: {0: 1}}, strict=True)
    assert step(env, (0, 0)) == (1, 1)


def test_step_hand_evaluation_negative():
    env = make_env(2, tables={0: {2: -1}, 1: {2: -1}}, strict=True)
    assert step(env, (2, 2)) == (1, 1)


def test_step_3d():
    env = make_env(3, tables={0: {(0, 0): 1}, 1: {(0, 0): 1}, 2: {(0, 0): 1}}, strict=True)
    assert step(env, (0, 0, 0)) == (1, 1, 1)


def test_step_changes_every_coordinate():
    env = make_env(3, seed=12)
    v = (3, -4, 7)
    w = step(env, v)
    assert all(abs(a - b) == 1 for a, b in zip(v, w))


def test_run_hand_trajectory():
    env = trap_example_env()
    out = run(env, (0, 0), 100, keep_prefix=10)
    assert out.absorbed
    assert out.cycle_entry == 1
    assert out.period == 2
    assert set(out.cycle_vertices) == {(1, 1), (2, 2)}
    assert out.max_sup_norm == 2
    assert out.trajectory_prefix[:3] == ((0, 0), (1, 1), (2, 2))
    assert out.footprint == 3


def test_run_budget_exhausted_monotone():
    env = plus_env()
    out = run(env, (0, 0), 100)
    assert out.absorption == EXHAUSTED
    assert out.steps_executed == 100
    assert out.max_sup_norm == 100
    assert not out.memory_exhausted


def test_run_seeded_absorbs_with_period_2():
    out = run(make_env(2, seed=31337), (0, 0), 10**7)
    assert out.absorbed
    assert out.period == 2


def test_run_deterministic():
    env = make_env(2, seed=99)
    a = run(env, (5, -3), 10**6, keep_prefix=50)
    b = run(env, (5, -3), 10**6, keep_prefix=50)
    assert a == b


def test_periods_even_in_3d():
    for i in range(300):
        out = run(make_env(3, seed=9000 + i), (0, 0, 0), 10**6)
        assert out.absorbed
        assert out.period is not None and out.period % 2 == 0


def test_memory_cap_flagged():
    env = plus_env(2000)
    out = run(env, (0, 0), 10**6, memory_cap=50)
    assert out.absorption == EXHAUSTED
    assert out.memory_exhausted
    assert out.footprint >= 50


def test_overflow_surfaces():
    env = make_env(2, seed=1)
    with pytest.raises(CoordinateOverflowError):
        run(env, (2**62 - 1, 0), 10)


def test_trajectory_vertices_matches_run():
    env = trap_example_env()
    assert trajectory_vertices(env, (0, 0), 100) == [(0, 0), (1, 1), (2, 2)]


def test_budget_zero():
    env = make_env(2, seed=5)
    out = run(env, (0, 0), 0)
    assert out.absorption == EXHAUSTED
    assert out.steps_executed == 0
