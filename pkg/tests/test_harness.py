"""Convergence harness: reference bound, gap measurement, slope fitting."""

import dataclasses

import pytest

from leadfollow import (
    ConfigMismatch,
    ConstantRate,
    FrameMissing,
    convergence_study,
    macro_preset,
    micro_macro_gap,
    micro_preset,
    nu_sigma_solve,
    simulate,
    theta_bound,
)


# ---------------------------------------------------------------------------
# theta bound
# ---------------------------------------------------------------------------
def test_theta_bound_all_terms_unit_at_n1():
    assert theta_bound(1, K1=1.0, K2=1.0, d=1) == pytest.approx(4.0)


def test_theta_bound_n16_value():
    # 16^(-1/2) + 16^(-2/3) + 16^(-1/4) + 16^(-1/3), recomputed directly
    expected = 0.25 + 2.0 ** (-8.0 / 3.0) + 0.5 + 2.0 ** (-4.0 / 3.0)
    assert theta_bound(16) == pytest.approx(expected, abs=1e-15)
    assert theta_bound(16) == pytest.approx(1.3043403942289091, abs=1e-12)


def test_theta_bound_monotone_in_n():
    vals = [theta_bound(n) for n in (1, 2, 5, 17, 100, 5000)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_theta_bound_matches_high_precision(rng):
    import mpmath

    mpmath.mp.dps = 50
    for _ in range(10):
        n = int(rng.integers(1, 10**6))
        k1 = float(rng.uniform(0.1, 5.0))
        k2 = float(rng.uniform(0.1, 5.0))
        d = int(rng.integers(1, 5))
        nn, kk1, kk2 = mpmath.mpf(n), mpmath.mpf(k1), mpmath.mpf(k2)
        ref = kk1 * (nn ** mpmath.mpf("-0.5") + nn ** (-mpmath.mpf(2) / 3)) + kk2 ** (
            1 / (2 * mpmath.mpf(d))
        ) * (nn ** (-1 / (4 * mpmath.mpf(d))) + nn ** (-1 / (3 * mpmath.mpf(d))))
        assert theta_bound(n, k1, k2, d) == pytest.approx(float(ref), abs=1e-12)


def test_theta_bound_rejects_bad_args():
    with pytest.raises(ValueError):
        theta_bound(0)
    with pytest.raises(ValueError):
        theta_bound(10, K1=-1.0)


# ---------------------------------------------------------------------------
# micro-macro gap
# ---------------------------------------------------------------------------
@pytest.fixture(scope="module")
def short_ia_macro():
    return dataclasses.replace(macro_preset("test-ia"), t_final=1.0)


def test_gap_components_nonnegative(short_ia_macro):
    macro_series = nu_sigma_solve(short_ia_macro, record_every=1)
    micro_cfg = dataclasses.replace(
        micro_preset("test-ia", n_particles=100, seed=2), t_final=1.0, record_every=1
    )
    series = simulate(micro_cfg)
    w1s, w1l = micro_macro_gap(series, macro_series, 1.0)
    assert w1s >= 0.0 and w1l >= 0.0


def test_gap_at_time_zero_bounded_by_cell_width(short_ia_macro):
    # quota sampling inverts the grid CDF, so the t=0 empirical measure sits
    # within one cell of the macro density
    macro_series = nu_sigma_solve(short_ia_macro, record_every=1)
    micro_cfg = dataclasses.replace(
        micro_preset("test-ia", n_particles=640, seed=0), t_final=1.0, record_every=1
    )
    series = simulate(micro_cfg)
    w1s, w1l = micro_macro_gap(series, macro_series, 0.0)
    assert w1s <= short_ia_macro.dx
    assert w1l <= 1.0 / 640 + 1e-12


def test_gap_missing_frame_raises(short_ia_macro):
    macro_series = nu_sigma_solve(short_ia_macro, record_every=1)
    micro_cfg = dataclasses.replace(
        micro_preset("test-ia", n_particles=16, seed=0), t_final=1.0, record_every=1
    )
    series = simulate(micro_cfg)
    with pytest.raises(FrameMissing):
        micro_macro_gap(series, macro_series, 9.0)


# ---------------------------------------------------------------------------
# convergence study
# ---------------------------------------------------------------------------
def test_study_rejects_mismatched_physics(short_ia_macro):
    micro_cfg = dataclasses.replace(
        micro_preset("test-ia"), t_final=1.0, rate_F=ConstantRate(0.5)
    )
    with pytest.raises(ConfigMismatch):
        convergence_study(short_ia_macro, micro_cfg, (10, 20), (0,), (1.0,))


def test_study_rejects_late_checkpoint(short_ia_macro):
    micro_cfg = dataclasses.replace(micro_preset("test-ia"), t_final=1.0)
    with pytest.raises(ConfigMismatch):
        convergence_study(short_ia_macro, micro_cfg, (10,), (0,), (2.0,))


@pytest.fixture(scope="module")
def small_report(short_ia_macro):
    micro_cfg = dataclasses.replace(micro_preset("test-ia"), t_final=1.0)
    return convergence_study(
        short_ia_macro,
        micro_cfg,
        Ns=(25, 100, 400),
        seeds=(0, 1, 2, 3),
        checkpoints=(1.0,),
    )


def test_study_report_shape(small_report):
    assert len(small_report.rows) == 3 * 4
    assert len(small_report.aggregates) == 3
    assert 1.0 in small_report.slopes


def test_study_errors_decay(small_report):
    means = [a.mean_error for a in small_report.aggregates]
    assert means[-1] < means[0]


def test_study_slope_ci_brackets_slope(small_report):
    slope, lo, hi = small_report.slopes[1.0]
    assert lo <= slope <= hi


def test_study_deterministic(short_ia_macro, small_report):
    # a parallel rerun must reproduce the serial study bitwise
    micro_cfg = dataclasses.replace(micro_preset("test-ia"), t_final=1.0)
    again = convergence_study(
        short_ia_macro,
        micro_cfg,
        Ns=(25, 100, 400),
        seeds=(0, 1, 2, 3),
        checkpoints=(1.0,),
        threads=2,
    )
    for a, b in zip(small_report.rows, again.rows):
        assert (a.N, a.seed, a.t, a.w1_space, a.w1_label) == (
            b.N,
            b.seed,
            b.t,
            b.w1_space,
            b.w1_label,
        )
    assert small_report.slopes == again.slopes


def test_trivial_dynamics_zero_label_error(short_ia_macro):
    # zero kernels and rates with quota sampling: nothing evolves and the
    # label split is exact, so the label error vanishes at all times
    macro = dataclasses.replace(
        short_ia_macro,
        kernel_F=dataclasses.replace(short_ia_macro.kernel_F, C=1e-9),
        rate_F=ConstantRate(0.0),
        rate_L=ConstantRate(0.0),
    )
    from leadfollow import ZeroKernel

    macro = dataclasses.replace(macro, kernel_F=ZeroKernel(), kernel_L=ZeroKernel())
    micro_cfg = dataclasses.replace(
        micro_preset("test-ia", n_particles=80),
        t_final=1.0,
        kernel_F=ZeroKernel(),
        kernel_L=ZeroKernel(),
        rate_F=ConstantRate(0.0),
        rate_L=ConstantRate(0.0),
    )
    report = convergence_study(macro, micro_cfg, (80,), (0, 1), (0.5, 1.0))
    for row in report.rows:
        assert row.w1_label == 0.0
