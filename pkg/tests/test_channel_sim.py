import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zippercodes.channel_sim import (
    CSV_COLUMNS,
    CSV_VERSION,
    SimPoint,
    ZipperSystem,
    binary_entropy,
    bsc_transmit,
    fit_extrapolate,
    gap_db,
    gap_report,
    q_function,
    q_inv,
    read_points_csv,
    run_sim_point,
    run_trial,
    shannon_limit_p,
    trial_rng,
    write_points_csv,
)
from zippercodes.galois_bch import make_shortened_bch
from zippercodes.window_decoder import DecoderConfig
from zippercodes.zipper_core import make_delayed_diagonal


def small_system(truncation=(32, 8)):
    spec, im = make_delayed_diagonal(12, 2, make_shortened_bch(5, 2, 24))
    return ZipperSystem(spec, im, DecoderConfig(window_rows=50, chunk_rows=8, truncation=truncation))


def q_inv_bisect(x):
    lo, hi = 0.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if q_function(mid) > x:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_bsc_identity_and_fairness():
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, 1000, dtype=np.uint8)
    assert np.array_equal(bsc_transmit(bits, 0.0, rng), bits)
    n = 10**6
    flips = int(np.count_nonzero(bsc_transmit(np.zeros(n, np.uint8), 0.5, trial_rng(1, 0))))
    assert abs(flips - n / 2) <= 5 * math.sqrt(n / 4)
    a = bsc_transmit(np.zeros(5000, np.uint8), 0.1, trial_rng(7, 3))
    b = bsc_transmit(np.zeros(5000, np.uint8), 0.1, trial_rng(7, 3))
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        bsc_transmit(bits, 0.6, rng)


def test_noiseless_point():
    pt = run_sim_point(small_system(), 0.0, 1, max_trials=3)
    assert pt.post_errors == 0 and pt.pre_errors == 0 and pt.trials == 3


def test_low_p_is_clean_and_pre_ber_near_p():
    sysm = small_system()
    pt = run_sim_point(sysm, 0.002, 5, max_trials=20)
    assert pt.post_errors == 0
    sigma = math.sqrt(pt.bits * 0.002 * 0.998)
    assert abs(pt.pre_errors - 0.002 * pt.bits) <= 5 * sigma


def test_trials_are_prefix_stable():
    sysm = small_system()
    short = run_sim_point(sysm, 0.03, 3, min_errors=10**9, max_trials=3)
    long = run_sim_point(sysm, 0.03, 3, min_errors=10**9, max_trials=6)
    first = [run_trial(sysm, 0.03, 3, t) for t in range(3)]
    assert short.pre_errors == sum(r[2] for r in first)
    assert long.trials == 6 and long.bits == 2 * short.bits


def test_worker_count_does_not_change_results():
    sysm = small_system()
    a = run_sim_point(sysm, 0.05, 11, min_errors=30, max_trials=12, workers=1)
    b = run_sim_point(sysm, 0.05, 11, min_errors=30, max_trials=12, workers=2)
    assert a == b


def test_post_ber_drops_below_waterfall():
    sysm = small_system()
    hi = run_sim_point(sysm, 0.14, 2, min_errors=10**9, max_trials=10)
    lo = run_sim_point(sysm, 0.03, 2, min_errors=10**9, max_trials=10)
    assert hi.post_ber > 0 and lo.post_ber == 0


def test_extrapolate_exact_power_laws():
    pts = [(p, p**2) for p in (1e-3, 2e-3, 5e-3)]
    assert math.isclose(fit_extrapolate(pts), 10**-7.5, rel_tol=1e-10)
    pts = [(p, 1e3 * p**6) for p in (3e-3, 4e-3, 6e-3, 8e-3)]
    assert math.isclose(fit_extrapolate(pts), 1e-3, rel_tol=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(1.0, 12.0), st.floats(-3.0, 3.0), st.floats(-15.0, -3.0))
def test_extrapolate_recovers_any_power_law(slope, logc, target_exp):
    ps = [1e-3, 1.7e-3, 2.9e-3, 4.4e-3]
    pts = [(p, 10**logc * p**slope) for p in ps]
    want = 10 ** ((target_exp - logc) / slope)
    got = fit_extrapolate(pts, target_ber=10**target_exp)
    assert abs(math.log10(got) - math.log10(want)) < 1e-9


def test_extrapolate_rejects_bad_input():
    with pytest.raises(ValueError, match="two points"):
        fit_extrapolate([(1e-3, 1e-6), (2e-3, 0.0)])
    with pytest.raises(ValueError, match="duplicate"):
        fit_extrapolate([(1e-3, 1e-6), (1e-3, 2e-6)])
    with pytest.raises(ValueError, match="slope"):
        fit_extrapolate([(1e-3, 1e-6), (2e-3, 1e-7)])
    pts = [(1e-3, 1e-9), (2e-3, 1e-7), (4e-3, 0.2)]
    assert fit_extrapolate(pts, ber_ceiling=1e-2) == pytest.approx(fit_extrapolate(pts[:2]))


def test_shannon_limit():
    p = shannon_limit_p(0.96)
    assert abs(p - 4.300e-3) < 5e-6
    assert abs(binary_entropy(0.00430) - 0.04) < 1e-4
    assert abs(shannon_limit_p(0.5) - 0.1100) < 1e-4
    assert abs(binary_entropy(shannon_limit_p(0.8)) - 0.2) < 1e-10
    assert shannon_limit_p(0.999999) < 1e-7
    with pytest.raises(ValueError):
        shannon_limit_p(1.0)


def test_q_inverse():
    assert abs(q_inv(q_function(2.0)) - 2.0) < 1e-6
    assert 0 < q_inv(0.5 - 1e-12) < 1e-9
    assert abs(q_inv(2.68e-3) - 2.785) < 0.002
    assert abs(q_inv(2.68e-3) - q_inv_bisect(2.68e-3)) < 1e-9
    with pytest.raises(ValueError):
        q_inv(0.7)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-15, 0.49))
def test_q_inverse_relative_accuracy(x):
    assert abs(q_function(q_inv(x)) - x) / x <= 1e-6


def test_gap_examples():
    assert abs(gap_db(2.68e-3, 0.96) - 0.503) <= 0.02
    assert abs(gap_db(2.015e-3, 0.967) - 0.536) <= 0.02
    assert gap_db(shannon_limit_p(0.9), 0.9) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValueError):
        gap_db(0.01, 0.96)
    rep = gap_report(2.68e-3, 0.96)
    assert rep.gap_db >= 0 and rep.p_star <= rep.p_shannon
    assert "gap_db" in str(rep)


def test_gap_matches_independent_bisection():
    for rate, p_star in [(0.96, 2.68e-3), (0.98, 1.24e-3), (0.967, 2.073e-3)]:
        p_sh = shannon_limit_p(rate)
        want = 20 * math.log10(q_inv_bisect(p_star) / q_inv_bisect(p_sh))
        assert gap_db(p_star, rate) == pytest.approx(want, abs=1e-8)


def test_csv_round_trip():
    pts = [SimPoint(0.01, 1000, 700, 11, 3, 42), SimPoint(0.02, 2000, 1400, 40, 0, 42)]
    text = write_points_csv(pts)
    lines = text.splitlines()
    assert lines[0] == CSV_VERSION
    assert lines[1].split(",") == list(CSV_COLUMNS)
    back = read_points_csv(text)
    assert [(p.p, p.bits, p.info_bits, p.pre_errors, p.post_errors, p.seed) for p in back] == [
        (p.p, p.bits, p.info_bits, p.pre_errors, p.post_errors, p.seed) for p in pts
    ]
    with pytest.raises(ValueError):
        read_points_csv("p,bits\n0.1,3\n")
