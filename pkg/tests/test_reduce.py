import numpy as np
import pytest
from scipy import stats

from manhattan.env import make_env
from manhattan.graph import is_inward_trap
from manhattan.mc import derive_seed
from manhattan.reduce import (
    ReductionMap,
    WindowTooSmall,
    alternance_sites,
    block_lengths_of,
    index_maps,
    project_and_check,
    project_vertex,
    reduce_array,
    reduce_env,
    removal_set,
)
from manhattan.walk import trajectory_vertices


def seq_from(table):
    return lambda i: table[i]


def test_alternance_run_of_three():
    # +1,+1,(-1,+1,-1),+1,+1 : run at 0..2
    t = {-3: 1, -2: 1, -1: 1, 0: -1, 1: 1, 2: -1, 3: 1, 4: 1, 5: 1}
    assert alternance_sites(seq_from(t), (-3, 6)) == (0, 1, 2)


def test_alternance_constant_empty():
    assert alternance_sites(lambda i: 1, (-10, 10)) == ()


def test_alternance_even_run_of_six():
    # bounded by (-1,-1) left and (+1,+1) right, alternating 0..5
    t = {-3: -1, -2: -1, -1: -1, 0: 1, 1: -1, 2: 1, 3: -1, 4: 1, 5: -1, 6: 1, 7: 1, 8: 1}
    assert alternance_sites(seq_from(t), (-3, 9)) == (0, 1, 2, 3, 4, 5)
    rmap = removal_set(seq_from(t), (-3, 9))
    assert rmap.B == (0, 1, 2, 3, 4, 5)  # even run: B = A
    assert all(rmap.block_lengths[x] == 6 for x in rmap.A)
    # removing leaves (-)(+): -1,-1,-1,+1,+1,+1
    kept = [t[i] for i in range(-3, 9) if i not in set(rmap.B)]
    assert kept == [-1, -1, -1, 1, 1, 1]


def test_removal_set_odd_run():
    t = {-3: 1, -2: 1, -1: 1, 0: -1, 1: 1, 2: -1, 3: 1, 4: 1, 5: 1}
    rmap = removal_set(seq_from(t), (-3, 6))
    assert rmap.A == (0, 1, 2)
    assert rmap.block_lengths == {0: 3, 1: 3, 2: 3}
    assert rmap.B == (0, 1, 2, 3)
    kept = [t[i] for i in range(-3, 6) if i not in set(rmap.B)]
    assert set(kept) == {1}  # alternation-free all +1


def test_removal_set_empty():
    rmap = removal_set(lambda i: -1, (-8, 8))
    assert rmap.A == () and rmap.B == ()


def test_window_too_small():
    with pytest.raises(WindowTooSmall):
        alternance_sites(lambda i: 1, (0, 2))


def test_boundary_runs_flagged_not_removed():
    # alternation touching the window edge stays in place
    t = {i: (1 if i % 2 == 0 else -1) for i in range(-6, 7)}
    rmap = removal_set(seq_from(t), (-6, 7))
    assert rmap.B == ()
    assert rmap.unresolved  # the whole run touches both margins


def test_sigma_pi_examples():
    rm = ReductionMap(axis=0, window=(-10, 10), A=(0, 1, 2),
                      block_lengths={0: 3, 1: 3, 2: 3}, B=(0, 1, 2, 3))
    sigma, pi = index_maps(rm)
    assert sigma(0) == 4
    assert sigma(1) == 5
    assert sigma(-1) == -1
    assert pi(4) == 0


def test_sigma_identity_when_B_empty():
    rm = ReductionMap(axis=0, window=(-5, 5), A=(), block_lengths={}, B=())
    sigma, pi = index_maps(rm)
    for n in range(-5, 5):
        assert sigma(n) == n
        assert pi(n) == n


def test_sigma_pi_inverse_property():
    rng = np.random.default_rng(3)
    for _ in range(40):
        window = (-30, 30)
        b = sorted(set(int(v) for v in rng.integers(-25, 25, size=8)))
        rm = ReductionMap(axis=0, window=window, A=(), block_lengths={}, B=tuple(b))
        sigma, pi = index_maps(rm)
        nlo, nhi = rm.reduced_range()
        values = [sigma(n) for n in range(nlo, nhi)]
        assert values == sorted(values)  # strictly increasing
        assert set(values) == set(range(*window)) - set(b)
        for n in range(nlo, nhi):
            assert pi(sigma(n)) == n


def test_reduce_env_constant_unchanged():
    rng = range(-80, 81)
    env = make_env(2, tables={0: {y: 1 for y in rng}, 1: {x: -1 for x in rng}}, strict=True)
    reduced, maps = reduce_env(env, (-40, 40))
    assert maps[0].B == () and maps[1].B == ()
    for n in range(-30, 30):
        assert reduced.orientation(0, (n,)) == 1
        assert reduced.orientation(1, (n,)) == -1


def test_reduce_env_seeded_no_alternance_min_block_2():
    for w in range(5):
        env = make_env(2, seed=derive_seed(11, w))
        reduced, maps = reduce_env(env, (-1500, 1500))
        for axis in (0, 1):
            nlo, nhi = maps[axis].reduced_range()
            vals = np.array([reduced.orientation(axis, (n,)) for n in range(nlo, nhi)],
                            dtype=np.int8)
            assert alternance_sites(lambda i, a=axis: reduced.orientation(a, (i,)),
                                    (nlo, nhi)) == ()
            interior_blocks = block_lengths_of(vals)[1:-1]
            assert interior_blocks.min() >= 2


def test_reduced_block_length_law():
    """Reduced blocks follow the min-2 geometric law P(m) = (1/3)(2/3)^(m-2).

    Oracle derivation: original blocks are Geom(1/2); runs of r
    size-one blocks vanish, odd runs merge their equal-sign flanks while
    donating one sign; summing the generating functions gives
    z^2/(3 - 2z), i.e. the shifted geometric with ratio 2/3.
    """
    rng = np.random.default_rng(424242)
    u = rng.choice(np.array([-1, 1], dtype=np.int8), size=1_000_000)
    reduced = reduce_array(u)[200:-200]
    lengths = block_lengths_of(reduced)[1:-1]
    assert lengths.min() >= 2
    counts = np.bincount(lengths)
    kmax = 12
    observed = [int(counts[k]) if k < len(counts) else 0 for k in range(2, kmax)]
    observed.append(int(lengths[lengths >= kmax].size))
    n = sum(observed)
    expected = [n * (1 / 3) * (2 / 3) ** (k - 2) for k in range(2, kmax)]
    expected.append(n * (2 / 3) ** (kmax - 2))
    chi2, p = stats.chisquare(observed, expected)
    assert p > 0.01, (chi2, p)


def _zigzag_run_env():
    """One (-1,+1,-1) run on the vertical-line axis at x in {-1,0,1}."""
    v = {x: (1 if x == 0 else -1) for x in range(-9, 10)}
    u = {y: (1 if y % 3 else -1) for y in range(-9, 10)}
    return make_env(2, tables={0: u, 1: v}, seed=606060)


def test_project_and_check_identity_when_no_alternance():
    t = {-1: 1, 0: 1, 1: 1, 2: -1, 3: -1}
    env = make_env(2, tables={0: dict(t), 1: dict(t)}, seed=989)
    reduced, maps = reduce_env(env, (-64, 64))
    chk = project_and_check(env, maps, (0, 0), (1, 1), 10_000, reduced=reduced)
    assert chk.original_reaches is True
    assert chk.preserved is True
    # identity projection on the explicit core
    assert project_vertex(maps, (0, 0)) == (0, 0) or maps[1].B or maps[0].B


def test_zigzag_fixture_preservation_exhaustive():
    env = _zigzag_run_env()
    reduced, maps = reduce_env(env, (-256, 256))
    assert 0 in maps[1].A  # the fixture run at x=0 is an alternance site
    removed_v = set(maps[1].B)
    removed_u = set(maps[0].B)
    checked = 0
    for ax in range(-4, 5):
        for ay in range(-4, 5):
            a = (ax, ay)
            if a[0] in removed_v or a[1] in removed_u:
                continue
            orbit = trajectory_vertices(env, a, 10_000)
            if any(max(abs(v[0]), abs(v[1])) > 200 for v in orbit):
                continue
            for b in orbit[1:]:
                if b[0] in removed_v or b[1] in removed_u:
                    continue
                chk = project_and_check(env, maps, a, b, 10_000, reduced=reduced)
                assert not chk.indeterminate
                assert chk.preserved is True, (a, b)
                checked += 1
    assert checked > 50


def test_seeded_preservation_sampled():
    env = make_env(2, seed=20_26)
    reduced, maps = reduce_env(env, (-400, 400))
    removed_v = set(maps[1].B)
    removed_u = set(maps[0].B)
    rng = np.random.default_rng(5)
    decided = 0
    while decided < 60:
        a = (int(rng.integers(-60, 61)), int(rng.integers(-60, 61)))
        orbit = trajectory_vertices(env, a, 100_000)
        b = orbit[-2]
        if any(max(abs(v[0]), abs(v[1])) > 350 for v in (a, b)):
            continue
        if (a[0] in removed_v or b[0] in removed_v
                or a[1] in removed_u or b[1] in removed_u):
            continue
        chk = project_and_check(env, maps, a, b, 100_000, reduced=reduced)
        if chk.indeterminate:
            continue
        assert chk.preserved is True, (a, b)
        decided += 1


def test_trap_preservation_spot_check():
    """A reduced inward trap vertex, pulled back, is absorbed in the
    original environment at a trap projecting onto the same pair."""
    checked = 0
    for w in range(6):
        env = make_env(2, seed=derive_seed(37, w))
        reduced, maps = reduce_env(env, (-300, 300))
        sigma_v, _ = index_maps(maps[1])
        sigma_u, _ = index_maps(maps[0])
        for wx in range(-25, 25):
            for wy in range(-25, 25):
                try:
                    if not is_inward_trap(reduced, (wx, wy)):
                        continue
                except KeyError:
                    continue
                orig = (sigma_v(wx), sigma_u(wy))
                orbit = trajectory_vertices(env, orig, 100_000)
                t_prime = orbit[-2]
                partner = orbit[-1]
                removed_v = set(maps[1].B)
                removed_u = set(maps[0].B)
                if (t_prime[0] in removed_v or t_prime[1] in removed_u
                        or partner[0] in removed_v or partner[1] in removed_u):
                    continue
                pt = project_vertex(maps, t_prime)
                reduced_pair = {(wx, wy), (wx + (1 if reduced.u(wy) == 1 else -1),
                                           wy + (1 if reduced.v(wx) == 1 else -1))}
                assert pt in reduced_pair, (w, (wx, wy), t_prime, pt)
                checked += 1
    assert checked >= 30
