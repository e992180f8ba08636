"""Threshold crossing times, path stepping, and ensemble reduction."""

import math

import numpy as np
import pytest

from hetsis import (
    BoundaryMode,
    InvalidArgumentError,
    NoiseMode,
    NonSeparableDrift,
    SeparablePowerDrift,
    SimConfig,
    beta_at,
    ensemble_stats_from_paths,
    integrate_deterministic,
    make_fields,
    make_quadrature_space,
    simulate_ensemble,
    simulate_path,
    t_crit,
)


def hom_fields(sigma=0.01, beta=0.3, gamma=0.4, eta=0.0, n=1):
    sp = make_quadrature_space(n)
    return sp, make_fields(sp, beta=beta, gamma=gamma, sigma=sigma, eta=eta)


def test_t_crit_linear_closed_form():
    sp, fl = hom_fields()
    drift = SeparablePowerDrift(rate=1e-4, exponent=1.0, beta_shape=fl.beta)
    # R0(t) = eps t beta/gamma crosses 1 at gamma/(beta eps)
    assert t_crit(drift, sp, fl) == pytest.approx(0.4 / (0.3 * 1e-4), rel=1e-15)


def test_t_crit_power_bisection_matches_closed_form():
    sp, fl = hom_fields()
    for r in (0.8, 1.5, 2.3):
        drift = SeparablePowerDrift(rate=1e-4, exponent=r, beta_shape=fl.beta)
        expected = (0.4 / (0.3 * 1e-4)) ** (1.0 / r)
        assert t_crit(drift, sp, fl) == pytest.approx(expected, rel=1e-11)


def test_t_crit_nonseparable_unit_reproduction():
    sp = make_quadrature_space(60)
    fl = make_fields(sp, beta=0.3, gamma=0.4, sigma=0.01)
    drift = NonSeparableDrift(rate=1e-4)
    tc = t_crit(drift, sp, fl)
    r0_at_tc = sp.integrate(fl.q * fl.f * drift.rate * tc ** (sp.nodes + 0.5)) / 0.4
    assert r0_at_tc == pytest.approx(1.0, rel=1e-10)


def test_t_crit_requires_drift():
    sp, fl = hom_fields()
    with pytest.raises(InvalidArgumentError):
        t_crit(None, sp, fl)


def test_beta_at_hand_values():
    sp = make_quadrature_space(4)  # nodes 0.125, 0.375, 0.625, 0.875
    fl = make_fields(sp, beta=0.3, gamma=0.4)
    sep = SeparablePowerDrift(rate=2e-3, exponent=0.5, beta_shape=fl.beta)
    assert beta_at(sep, sp, 4.0, 2) == pytest.approx(2e-3 * 2.0 * 0.3, rel=1e-15)
    non = NonSeparableDrift(rate=1e-2)
    assert beta_at(non, sp, 9.0, 1) == pytest.approx(1e-2 * 9.0**0.875, rel=1e-14)


def test_drift_validation():
    sp, fl = hom_fields()
    with pytest.raises(InvalidArgumentError):
        SeparablePowerDrift(rate=0.0, exponent=1.0, beta_shape=fl.beta)
    with pytest.raises(InvalidArgumentError):
        SeparablePowerDrift(rate=1e-4, exponent=-1.0, beta_shape=fl.beta)
    with pytest.raises(InvalidArgumentError):
        SeparablePowerDrift(rate=1e-4, exponent=1.0, beta_shape=np.zeros(1))
    with pytest.raises(InvalidArgumentError):
        NonSeparableDrift(rate=-1e-4)


def test_sim_config_validation():
    for kwargs in (
        {"dt": 0.0},
        {"record_stride": 0},
        {"n_paths": 0},
        {"seed": -1},
        {"t_end": 0.0},
        {"chunk_paths": 0},
    ):
        with pytest.raises(InvalidArgumentError):
            SimConfig(**kwargs)


def test_record_grid_and_initial_stats():
    sp, fl = hom_fields(sigma=0.0)
    cfg = SimConfig(dt=0.25, record_stride=4, n_paths=3, i0=0.2, t_end=10.0)
    st = simulate_ensemble(sp, fl, None, cfg)
    np.testing.assert_allclose(st.times, np.arange(11.0), atol=1e-15)
    assert st.mean_path[0] == pytest.approx(0.2, abs=1e-15)
    assert st.var_path[0] == pytest.approx(0.0, abs=1e-30)
    assert st.counts[0] == 3
    assert st.n_diverged == 0 and not st.truncated


def test_noise_free_run_matches_deterministic_integrator():
    # eta > 0 exercises the import term; Euler vs RK4 agree to O(dt)
    sp, fl = hom_fields(sigma=0.0, eta=0.02, n=5)
    cfg = SimConfig(
        dt=0.01,
        record_stride=100,
        n_paths=1,
        t_end=5.0,
        boundary_mode=BoundaryMode.FREE,
        i0=0.05,
    )
    st = simulate_ensemble(sp, fl, None, cfg)
    traj = integrate_deterministic(sp, fl, i0=0.05, t_end=5.0, dt=0.01)
    picks = np.searchsorted(traj.times, st.times)
    agg = traj.i_of_t[picks] @ sp.weights
    np.testing.assert_allclose(st.mean_path, agg, atol=2e-4)
    assert st.var_path.max() == 0.0


def test_single_path_matches_ensemble_member():
    sp, fl = hom_fields()
    drift = SeparablePowerDrift(rate=1e-2, exponent=1.0, beta_shape=fl.beta)
    cfg = SimConfig(n_paths=1, seed=9, t_end=30.0)
    path = simulate_path(sp, fl, drift, cfg, 0)
    st = simulate_ensemble(sp, fl, drift, cfg)
    np.testing.assert_array_equal(path.values, st.mean_path)
    np.testing.assert_array_equal(path.times, st.times)


def test_shared_equals_independent_on_one_node():
    # a single node consumes the identical variate stream in both modes
    sp, fl = hom_fields()
    drift = SeparablePowerDrift(rate=1e-2, exponent=1.0, beta_shape=fl.beta)
    runs = {}
    for mode in (NoiseMode.SHARED, NoiseMode.INDEPENDENT):
        cfg = SimConfig(n_paths=8, seed=4, noise_mode=mode, t_end=40.0)
        runs[mode] = simulate_ensemble(sp, fl, drift, cfg)
    np.testing.assert_array_equal(
        runs[NoiseMode.SHARED].mean_path, runs[NoiseMode.INDEPENDENT].mean_path
    )
    np.testing.assert_array_equal(
        runs[NoiseMode.SHARED].var_path, runs[NoiseMode.INDEPENDENT].var_path
    )


def test_rerun_is_bit_identical():
    sp, fl = hom_fields()
    drift = SeparablePowerDrift(rate=1e-2, exponent=1.0, beta_shape=fl.beta)
    cfg = SimConfig(n_paths=16, seed=1, t_end=60.0, chunk_paths=5)
    a = simulate_ensemble(sp, fl, drift, cfg)
    b = simulate_ensemble(sp, fl, drift, cfg)
    np.testing.assert_array_equal(a.mean_path, b.mean_path)
    np.testing.assert_array_equal(a.var_path, b.var_path)
    np.testing.assert_array_equal(a.counts, b.counts)


def test_parallel_reduction_bit_identical():
    sp, fl = hom_fields()
    drift = SeparablePowerDrift(rate=1e-2, exponent=1.0, beta_shape=fl.beta)
    cfg = SimConfig(n_paths=12, seed=2, t_end=50.0, chunk_paths=4)
    serial = simulate_ensemble(sp, fl, drift, cfg, n_jobs=1)
    parallel = simulate_ensemble(sp, fl, drift, cfg, n_jobs=3)
    np.testing.assert_array_equal(serial.mean_path, parallel.mean_path)
    np.testing.assert_array_equal(serial.var_path, parallel.var_path)
    np.testing.assert_array_equal(serial.counts, parallel.counts)


def test_chunking_changes_nothing_measurable():
    sp, fl = hom_fields()
    drift = SeparablePowerDrift(rate=1e-2, exponent=1.0, beta_shape=fl.beta)
    whole = simulate_ensemble(sp, fl, drift, SimConfig(n_paths=20, seed=3, t_end=40.0))
    parts = simulate_ensemble(
        sp, fl, drift, SimConfig(n_paths=20, seed=3, t_end=40.0, chunk_paths=7)
    )
    np.testing.assert_allclose(whole.mean_path, parts.mean_path, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(whole.var_path, parts.var_path, rtol=1e-9, atol=1e-18)


def test_clamped_aggregate_stays_in_unit_box():
    sp = make_quadrature_space(20)
    fl = make_fields(sp, beta=0.3, gamma=0.4, sigma=0.05)
    drift = SeparablePowerDrift(rate=1e-2, exponent=1.0, beta_shape=fl.beta)
    cfg = SimConfig(n_paths=10, seed=5, noise_mode=NoiseMode.INDEPENDENT)
    st = simulate_ensemble(sp, fl, drift, cfg)
    assert np.all(st.mean_path >= 0.0)
    assert np.all(st.mean_path <= 1.0 + 1e-12)
    assert np.all(st.var_path >= 0.0)


def test_free_mode_divergence_bookkeeping():
    # supercritical frozen rates: free paths blow up, flagged and truncated
    sp, fl = hom_fields(sigma=0.01, beta=0.8, gamma=0.4)
    cfg = SimConfig(
        n_paths=6, seed=0, boundary_mode=BoundaryMode.FREE, t_end=400.0, i0=0.0
    )
    st = simulate_ensemble(sp, fl, None, cfg)
    # negative excursions run away; positive paths settle on the endemic branch
    assert st.n_diverged >= 1
    assert np.all(np.diff(st.counts) <= 0)
    assert np.all(np.isfinite(st.var_path))
    assert st.counts[-1] == 6 - st.n_diverged
    path = next(
        simulate_path(sp, fl, None, cfg, j)
        for j in range(6)
        if simulate_path(sp, fl, None, cfg, j).diverged
    )
    assert path.n_valid < path.values.size
    assert np.all(np.isfinite(path.values[: path.n_valid]))
    assert np.all(np.isnan(path.values[path.n_valid :]))


def test_ou_stationary_variance_small():
    # frozen subcritical rates give an OU aggregate with var sigma^2/(2 kappa)
    sp, fl = hom_fields(sigma=0.01)
    cfg = SimConfig(
        n_paths=400, seed=8, boundary_mode=BoundaryMode.FREE, t_end=300.0
    )
    st = simulate_ensemble(sp, fl, None, cfg)
    late = st.var_path[st.times >= 150.0]
    assert late.mean() == pytest.approx(1e-4 / (2.0 * 0.1), rel=0.15)


def test_stats_seam_location_invariance():
    rng = np.random.default_rng(0)
    times = np.arange(6.0)
    base = rng.normal(size=(40, 6))
    a = ensemble_stats_from_paths(times, base)
    b = ensemble_stats_from_paths(times, base + 7.5)
    np.testing.assert_allclose(a.var_path, b.var_path, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(b.mean_path - a.mean_path, np.full(6, 7.5), atol=1e-12)


def test_stats_seam_nan_handling():
    times = np.arange(3.0)
    paths = np.array([[1.0, 2.0, np.nan], [3.0, np.nan, np.nan], [5.0, 6.0, 7.0]])
    st = ensemble_stats_from_paths(times, paths)
    np.testing.assert_array_equal(st.counts, [3, 2, 1])
    assert st.mean_path[0] == pytest.approx(3.0)
    assert st.mean_path[1] == pytest.approx(4.0)
    assert st.var_path[1] == pytest.approx(8.0)  # unbiased: ((2-4)^2+(6-4)^2)/1
    assert st.var_path[2] == 0.0  # single survivor: variance undefined, reported 0
    assert st.n_diverged == 2


def test_i0_out_of_bounds_rejected():
    sp, fl = hom_fields()
    cfg = SimConfig(n_paths=2, i0=1.5, t_end=1.0)
    with pytest.raises(InvalidArgumentError):
        simulate_ensemble(sp, fl, None, cfg)


def test_aggregate_uses_plain_weights_not_coupling():
    # aggregate prevalence weights by mu alone even when q is non-uniform
    sp = make_quadrature_space(2)  # nodes 0.25, 0.75
    fl = make_fields(sp, beta=0.3, gamma=0.4, sigma=0.0, q=np.array([1.0, 3.0]))
    cfg = SimConfig(n_paths=1, i0=np.array([0.2, 0.4]), t_end=0.1, dt=0.1, record_stride=1)
    st = simulate_ensemble(sp, fl, None, cfg)
    assert st.mean_path[0] == pytest.approx(0.3, abs=1e-15)
