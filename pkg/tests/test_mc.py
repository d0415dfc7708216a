import math

import numpy as np
import pytest

from manhattan.env import make_env
from manhattan.graph import classify_vertex
from manhattan.mc import (
    Search3DConfig,
    _ci_half_width,
    derive_seed,
    exhaustive_box2_search,
    find_nontrivial_cycle_3d,
    fit_stretched_exponential,
    gather_walks,
    renewal_record,
    renewal_stats,
    replay_certificate_3d,
    sample_walks,
    size_bias_check,
    tail_curve,
)
from manhattan.walk import run


# ------------------------------------------------------------ determinism

def test_same_master_seed_identical_summary():
    a = sample_walks(77, 3_000, 10**6)
    b = sample_walks(77, 3_000, 10**6)
    assert a == b


def test_worker_count_invariance():
    a = sample_walks(78, 4_000, 10**6, workers=1, chunk=1024)
    b = sample_walks(78, 4_000, 10**6, workers=2, chunk=1024)
    assert a == b


def test_chunk_layout_fixed_by_chunk_parameter():
    a = tail_curve(79, (2, 8, 32), 5_000, 10**6, chunk=512)
    b = tail_curve(79, (2, 8, 32), 5_000, 10**6, chunk=2048)
    assert a.exceed_counts == b.exceed_counts


# ----------------------------------------------------- engine cross-check

def test_batch_agrees_with_scalar_runs():
    arrs = gather_walks(4321, 200, 10**6)
    for i in range(200):
        env = make_env(2, seed=derive_seed(4321, i))
        out = run(env, (0, 0), 10**6)
        assert out.absorbed == arrs.absorbed[i]
        assert out.period == arrs.period[i]
        assert out.max_sup_norm == arrs.max_sup[i]


def test_batch_renewal_agrees_with_scalar_records():
    arrs = gather_walks(8765, 300, 10**6)
    for i in range(300):
        env = make_env(2, seed=derive_seed(8765, i))
        rec = renewal_record(env, 10**6)
        assert rec.T == arrs.T[i]
        assert rec.trap_at_T == arrs.trap_at_T[i]
        assert rec.N == arrs.N[i]
        assert rec.d_minus == arrs.d_minus[i]
        assert rec.d_plus == arrs.d_plus[i]
        for s_r, t_r in rec.intervals:
            assert t_r - s_r >= 0


def test_absorption_small_sample():
    s = sample_walks(101, 2_000, 10**6)
    assert s.censored == 0
    assert s.period_histogram == {2: 2_000}


# ------------------------------------------------------- renewal details

def test_renewal_record_hand_example():
    t = {-1: 1, 0: 1, 1: 1, 2: -1, 3: -1}
    env = make_env(2, tables={0: dict(t), 1: dict(t)}, strict=True)
    rec = renewal_record(env, 100)
    assert rec.T == 2
    assert rec.Z_T == (2, 2)
    assert rec.trap_at_T is True
    assert classify_vertex(env, (2, 2)).inward_trap
    assert rec.intervals[0] == (0, 2)
    assert rec.N == 0


def test_renewal_interval_length_identity():
    """L_r = T_r - S_r equals the eastward displacement X_{T_r} - X_{S_r}."""
    for i in range(150):
        env = make_env(2, seed=derive_seed(5150, i))
        rec = renewal_record(env, 10**6)
        xs = [0]
        pos = (0, 0)
        for _ in range(2000):
            pos = (pos[0] + env.u(pos[1]), pos[1] + env.v(pos[0]))
            xs.append(pos[0])
        for s_r, t_r in rec.intervals:
            assert xs[t_r] - xs[s_r] == t_r - s_r


def test_trap_probability_near_half_given_arrival():
    rep = renewal_stats(608, 10_000, 10**6)
    assert 0.485 <= rep.p_trap_given_t_ge1 <= 0.515
    # unconditional mixture: 1/4 on T=0 (prob 1/2) plus 1/2 after
    assert abs(rep.p_trap_all - 0.375) <= 3 * math.sqrt(0.375 * 0.625 / rep.count)
    assert abs(rep.t_zero / rep.count - 0.5) <= 3 * math.sqrt(0.25 / rep.count)
    assert rep.t_finite_fraction == 1.0


def test_geometric_domination_small():
    rep = renewal_stats(707, 20_000, 10**6)
    tail = {}
    for k, c in rep.n_histogram.items():
        for j in range(k + 1):
            tail[j] = tail.get(j, 0) + c
    for k in range(0, 8):
        exceed = tail.get(k + 1, 0)
        if exceed < 100:
            break
        assert exceed / rep.count <= 1.2 * 0.5 ** k


# ------------------------------------------------------------- tail curve

def test_tail_threshold_zero_always_exceeded():
    tc = tail_curve(303, (0, 2), 2_000, 10**6)
    assert tc.exceed_counts[0] == 2_000  # the first step always moves


def test_tail_monotone_and_censoring_reported():
    tc = tail_curve(304, (2, 4, 8, 16, 32), 20_000, 10**6)
    assert tc.censored == 0
    surv = tc.survival
    assert all(a >= b for a, b in zip(surv, surv[1:]))


def test_tail_rejects_unsorted_thresholds():
    with pytest.raises(ValueError):
        tail_curve(1, (8, 2), 100, 10**4)


def test_euclid_norm_brackets_sup_norm():
    arrs = gather_walks(55, 2_000, 10**6)
    eu = np.sqrt(arrs.max_euclid_sq.astype(np.float64))
    assert (eu >= arrs.max_sup - 1e-9).all()
    assert (eu <= np.sqrt(2.0) * arrs.max_sup + 1e-9).all()
    sup_curve = tail_curve(55, (2, 8, 32), 2_000, 10**6, norm="sup")
    eu_curve = tail_curve(55, (2, 8, 32), 2_000, 10**6, norm="euclid")
    assert all(e >= s for e, s in zip(eu_curve.exceed_counts, sup_curve.exceed_counts))


def test_ci_coverage_on_synthetic_bernoulli():
    rng = np.random.default_rng(11)
    p_true, n, trials = 0.3, 500, 2_000
    covered = 0
    for _ in range(trials):
        k = rng.binomial(n, p_true)
        half = _ci_half_width(int(k), n)
        covered += abs(k / n - p_true) <= half
    assert 0.91 <= covered / trials <= 0.99


def test_fit_synthetic_exact_third():
    ns = [2**k for k in range(1, 11)]
    ps = [math.exp(-(n ** (1 / 3))) for n in ns]
    fit = fit_stretched_exponential(ns, ps)
    assert abs(fit.beta - 1 / 3) <= 0.01
    assert fit.points_used == len(ns)


def test_fit_synthetic_with_rate_two():
    ns = [2**k for k in range(1, 11)]
    ps = [math.exp(-2.0 * n ** 0.25) for n in ns]
    fit = fit_stretched_exponential(ns, ps)
    assert abs(fit.beta - 0.25) <= 0.01
    assert abs(fit.c - 2.0) <= 0.05


def test_fit_needs_enough_points():
    with pytest.raises(ValueError):
        fit_stretched_exponential([2, 4], [0.5, 0.4])


# -------------------------------------------------------------- size bias

def test_size_bias_identity_and_diagnostics():
    rep = size_bias_check(888, 20_000)
    assert abs(rep.lhs - rep.rhs) <= 3 * rep.combined_se
    assert abs(rep.p_trap_origin - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / rep.count)
    # mass conservation: mean basin size over trap origins is exactly 1
    assert abs(rep.mean_basin_on_trap - 1.0) <= 0.05
    # the literal squared estimator double-counts the two inward vertices
    assert 1.6 <= rep.rhs_squared / rep.lhs <= 2.4
    assert rep.truncated_count == 0


def test_size_bias_histograms_consistent():
    rep = size_bias_check(889, 2_000)
    assert sum(rep.size_histogram.values()) == 2_000
    assert sum(rep.diam_histogram.values()) == 2_000
    assert min(rep.size_histogram) >= 2


# ------------------------------------------------------------------- 3D

def test_exhaustive_box2_definitive_negative():
    assignments, nontrivial = exhaustive_box2_search()
    assert assignments == 4096
    assert nontrivial == 0


def test_3d_walks_absorb_with_even_periods():
    absorbed, period, steps, max_sup = gather_walks(1101, 300, 10**6, dimension=3)
    assert absorbed.all()
    assert (period[absorbed] % 2 == 0).all()
    assert (period[absorbed] >= 2).all()


def test_3d_search_finds_replayable_certificates():
    cfg = Search3DConfig(master_seed=1102, samples=30_000, budget=50_000,
                         max_certificates=3)
    rep = find_nontrivial_cycle_3d(cfg)
    assert rep.nontrivial_found >= 1
    assert rep.certificates
    for cert in rep.certificates:
        assert cert.period > 2
        assert replay_certificate_3d(cert)
    assert rep.box2_exhaustive_nontrivial == 0


def test_3d_batch_agrees_with_scalar():
    absorbed, period, _steps, _sup = gather_walks(424, 100, 10**6, dimension=3)
    for i in range(100):
        env = make_env(3, seed=derive_seed(424, i))
        out = run(env, (0, 0, 0), 10**6)
        assert out.absorbed == absorbed[i]
        assert out.period == period[i]
