import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qimd.analytics import (
    PIEZO_JITTER,
    SLM_JITTER,
    ScanPlan,
    balanced_wp,
    distill_phase,
    distillation_residual,
    distillation_uncertainty,
    distillation_uncertainty_sum,
    intrinsic_uncertainty,
    scan_uncertainty,
    scan_uncertainty_sum,
    single_point_uncertainty,
    uncertainty_report,
    wp_uncertainty_closed,
)
from qimd.exceptions import (
    ConsistencyError,
    DegenerateConfigurationError,
    NoFringeInformationError,
    StationaryPointError,
)
from qimd.fringe import MZI, NLI, FringeModel, NoiseChannel, derive_fringe, fringe_mean


def model_counts(model, plan, phi):
    return fringe_mean(model, phi + plan.thetas())


def test_scan_plan():
    plan = ScanPlan(4)
    assert np.allclose(plan.thetas(), [np.pi / 2, np.pi, 3 * np.pi / 2, 2 * np.pi])
    assert len(ScanPlan(7).thetas()) == 7
    with pytest.raises(ValueError):
        ScanPlan(2).require_distillation()
    with pytest.raises(ValueError):
        ScanPlan(0)
    with pytest.raises(ValueError):
        ScanPlan(5, theta_jitter=-1.0)


def test_distill_examples():
    model = FringeModel(1.0, 1.0)
    plan = ScanPlan(4)
    assert distill_phase(model_counts(model, plan, 0.7), plan) == pytest.approx(0.7, abs=1e-14)
    assert distill_phase(model_counts(model, plan, 0.0), plan) == pytest.approx(0.0, abs=1e-15)
    counts = model_counts(model, plan, 0.7)
    assert distill_phase(counts + 5.0, plan) == pytest.approx(distill_phase(counts, plan), abs=1e-14)


def test_distill_constant_counts():
    with pytest.raises(NoFringeInformationError):
        distill_phase([3.0, 3.0, 3.0, 3.0])


def test_distill_infers_steps():
    model = FringeModel(2.0, 0.5, noise_mean=1.0)
    plan = ScanPlan(6)
    assert distill_phase(model_counts(model, plan, -2.5)) == pytest.approx(-2.5, abs=1e-13)


@settings(max_examples=200, deadline=None)
@given(
    phi=st.floats(-math.pi + 1e-6, math.pi),
    delta=st.floats(-10.0, 10.0),
    steps=st.integers(3, 40),
    a=st.floats(0.1, 1e4),
    c=st.floats(0.05, 1.0),
    nn=st.floats(0.0, 100.0),
)
def test_distill_recovers_and_is_shift_equivariant(phi, delta, steps, a, c, nn):
    model = FringeModel(a, c, noise_mean=nn)
    plan = ScanPlan(steps)
    est = distill_phase(model_counts(model, plan, phi), plan)
    assert math.remainder(est - phi, 2 * math.pi) == pytest.approx(0.0, abs=1e-9)
    shifted = distill_phase(model_counts(model, plan, phi + delta), plan)
    assert math.remainder(shifted - est - delta, 2 * math.pi) == pytest.approx(0.0, abs=1e-9)
    assert -math.pi < est <= math.pi


@pytest.mark.parametrize(
    "model, expected",
    [(FringeModel(2.0, 1.0), 0.25), (FringeModel(1.0, 1.0, noise_mean=1.0, eta=0.5, lambda_n=1), 2.5)],
)
def test_intrinsic_examples(model, expected):
    assert intrinsic_uncertainty(model) == pytest.approx(expected, rel=1e-15)


def test_intrinsic_mzi_form():
    # eta n0 = 4 with n_n = 1 thermal noise
    model = derive_fringe(MZI(n0=8.0), NoiseChannel(eta=0.5, mean_noise=2.0, stats="thermal"))
    assert model.noise_mean == 1.0
    assert intrinsic_uncertainty(model) == pytest.approx(1.0, rel=1e-15)


def test_distillation_examples():
    plan = ScanPlan(5)
    assert distillation_uncertainty(FringeModel(2.0, 1.0), plan) == pytest.approx(0.2, rel=1e-15)
    assert distillation_uncertainty(FringeModel(2.0, 1.0, lambda_phi=1), plan) == pytest.approx(0.7, rel=1e-15)


def test_zero_contrast_rejected():
    model = FringeModel(2.0, 0.0)
    with pytest.raises(DegenerateConfigurationError):
        distillation_uncertainty(model, ScanPlan(5))
    with pytest.raises(DegenerateConfigurationError):
        wp_uncertainty_closed(model, ScanPlan(1))
    with pytest.raises(DegenerateConfigurationError):
        scan_uncertainty(model, ScanPlan(5, 0.01))


def test_distillation_rejects_short_plan():
    with pytest.raises(ValueError):
        distillation_uncertainty(FringeModel(2.0, 1.0), ScanPlan(2))


@pytest.mark.parametrize("phi", [0.0, 0.3, 1.7, -2.9])
def test_distillation_sum_matches_closed_form(phi):
    for model, steps in [(FringeModel(3.0, 1.0), 8), (FringeModel(3.0, 1.0, lambda_phi=1), 5)]:
        plan = ScanPlan(steps)
        explicit, averaged = distillation_uncertainty_sum(model, plan, phi)
        closed = distillation_uncertainty(model, plan)
        assert explicit == pytest.approx(closed, rel=1e-10)
        assert averaged == pytest.approx(explicit, rel=1e-12)


def test_distillation_sum_handles_stationary_settings():
    # theta_j hits phi = 0 and pi exactly for even M
    model = FringeModel(5.0, 0.9, noise_mean=2.0, lambda_n=1)
    explicit, averaged = distillation_uncertainty_sum(model, ScanPlan(8), 0.0)
    assert math.isfinite(explicit) and math.isfinite(averaged)


def test_short_plans_report_residual():
    model = FringeModel(3.0, 1.0, lambda_phi=1)
    assert distillation_residual(model, ScanPlan(4), grid=181) > 1e-3
    assert distillation_residual(model, ScanPlan(5), grid=181) < 1e-12
    assert distillation_residual(model, ScanPlan(3), grid=181) > 1e-3


def test_scan_examples():
    model = FringeModel(3.0, 1.0)
    assert scan_uncertainty(model, ScanPlan(5, 0.01)) == pytest.approx(7.0e-5, rel=1e-12)
    assert scan_uncertainty(model, ScanPlan(5, 0.0)) == 0.0
    assert PIEZO_JITTER == pytest.approx(0.010)
    assert SLM_JITTER == pytest.approx(0.050)


@settings(max_examples=100, deadline=None)
@given(
    a=st.floats(0.1, 1e3),
    c=st.floats(0.1, 1.0),
    nn=st.floats(0.0, 50.0),
    steps=st.integers(5, 32),
    phi=st.floats(-4.0, 4.0),
)
def test_scan_sum_matches_closed_form(a, c, nn, steps, phi):
    model = FringeModel(a, c, noise_mean=nn)
    plan = ScanPlan(steps, PIEZO_JITTER)
    assert scan_uncertainty_sum(model, plan, phi) == pytest.approx(scan_uncertainty(model, plan), rel=1e-9)


def test_single_point_examples():
    assert single_point_uncertainty(FringeModel(1.0, 1.0), math.pi / 2) == pytest.approx(1.0, rel=1e-14)
    assert single_point_uncertainty(FringeModel(1.0, 1.0, lambda_phi=1), math.pi / 2) == pytest.approx(2.0, rel=1e-14)
    with pytest.raises(StationaryPointError):
        single_point_uncertainty(FringeModel(1.0, 1.0), 0.0)
    with pytest.raises(StationaryPointError):
        single_point_uncertainty(FringeModel(1.0, 1.0), math.pi)


def test_single_point_diverges_with_noise():
    model = FringeModel(2.0, 1.0, noise_mean=0.5, lambda_n=1)
    phi = 1e-4
    lead = model.noise_mean * (1 + model.noise_mean) / (model.amplitude * model.contrast * phi) ** 2
    assert single_point_uncertainty(model, phi) == pytest.approx(lead, rel=1e-2)


def test_wp_closed_examples():
    var, phi1 = wp_uncertainty_closed(FringeModel(2.0, 1.0), ScanPlan(1))
    assert var == pytest.approx(0.25, rel=1e-15)
    assert phi1 == 0.0
    var, _ = wp_uncertainty_closed(derive_fringe(NLI(n0=1.0, n0p=2.0)), ScanPlan(1))
    assert var == pytest.approx(0.125, rel=1e-14)
    thermal = FringeModel(7.0, 1.0, lambda_phi=1)
    for m in (1, 3, 8):
        var, _ = wp_uncertainty_closed(thermal, ScanPlan(m))
        assert var == pytest.approx(intrinsic_uncertainty(thermal) / m, rel=1e-15)


def test_wp_phi1_negative_raises(monkeypatch):
    import qimd.analytics as an

    monkeypatch.setattr(an, "_phi1", lambda model: -1e-9)
    with pytest.raises(ConsistencyError):
        an.wp_uncertainty_closed(FringeModel(2.0, 1.0), ScanPlan(1))
    monkeypatch.setattr(an, "_phi1", lambda model: -1e-14)
    assert an.wp_uncertainty_closed(FringeModel(2.0, 1.0), ScanPlan(1))[1] == 0.0


def test_balanced_examples():
    assert balanced_wp(1.0, ScanPlan(1)) == pytest.approx(0.125, rel=1e-15)
    assert balanced_wp(1.0, ScanPlan(2)) == pytest.approx(1.0 / 16.0, rel=1e-15)
    var, _ = wp_uncertainty_closed(derive_fringe(NLI(n0=3.0, n0p=7.0)), ScanPlan(1))
    assert var == pytest.approx(balanced_wp(3.0, ScanPlan(1)), rel=1e-9)
    with pytest.raises(ValueError):
        balanced_wp(0.0, ScanPlan(1))


model_params = dict(
    a=st.floats(0.1, 1e4),
    c=st.floats(0.05, 1.0),
    xi=st.floats(0.0, 5.0),
    lp=st.sampled_from([0, 1]),
    ln=st.sampled_from([0, 1]),
)


@settings(max_examples=300, deadline=None)
@given(**model_params, steps=st.integers(5, 24))
def test_wp_never_worse_than_distillation(a, c, xi, lp, ln, steps):
    model = FringeModel(a, c, noise_mean=xi * a, lambda_phi=lp, lambda_n=ln)
    plan = ScanPlan(steps)
    wp, phi1 = wp_uncertainty_closed(model, plan)
    assert phi1 >= 0.0
    assert 0.0 < wp <= distillation_uncertainty(model, plan) * (1 + 1e-12)


@settings(max_examples=150, deadline=None)
@given(**model_params)
def test_wp_matches_dense_scan(a, c, xi, lp, ln):
    model = FringeModel(a, c, noise_mean=xi * a, lambda_phi=lp, lambda_n=ln)
    wp, _ = wp_uncertainty_closed(model, ScanPlan(1))
    if xi == 0.0 and c == 1.0:
        # infimum sits at phi -> 0 and is covered by the boundary tests
        return
    phi = np.linspace(1e-6, math.pi - 1e-6, 10_000)
    coarse = np.min(single_point_uncertainty(model, phi))
    k = np.argmin(single_point_uncertainty(model, phi))
    fine = np.linspace(phi[max(k - 1, 0)], phi[min(k + 1, len(phi) - 1)], 10_001)
    scanned = min(coarse, float(np.min(single_point_uncertainty(model, fine))))
    assert scanned >= wp * (1 - 1e-9)
    assert scanned == pytest.approx(wp, rel=1e-6)


@settings(max_examples=100, deadline=None)
@given(**model_params, factor=st.floats(1.0, 100.0), steps=st.integers(5, 20))
def test_monotone_in_amplitude_and_steps(a, c, xi, lp, ln, factor, steps):
    small = FringeModel(a, c, noise_mean=xi * a, lambda_phi=lp, lambda_n=ln)
    large = FringeModel(a * factor, c, noise_mean=xi * a * factor, lambda_phi=lp, lambda_n=ln)
    plan, more = ScanPlan(steps), ScanPlan(steps + 1)
    tol = 1 + 1e-12
    assert distillation_uncertainty(large, plan) <= distillation_uncertainty(small, plan) * tol
    assert wp_uncertainty_closed(large, plan)[0] <= wp_uncertainty_closed(small, plan)[0] * tol
    assert distillation_uncertainty(small, more) <= distillation_uncertainty(small, plan) * tol
    assert wp_uncertainty_closed(small, more)[0] <= wp_uncertainty_closed(small, plan)[0] * tol


def test_report_fields():
    model = derive_fringe(NLI(n0=2.0, n0p=2.0), NoiseChannel(eta=0.7, mean_noise=2.0, stats="thermal"))
    rep = uncertainty_report(model, ScanPlan(8, SLM_JITTER))
    d = rep.to_dict()
    for key in ("intrinsic", "distillation", "scanning", "working_point", "wp_phase", "phi1"):
        assert d[key] is not None and d[key] >= 0 and math.isfinite(d[key])
    assert 0.0 <= rep.wp_phase <= math.pi
    short = uncertainty_report(model, ScanPlan(1))
    assert short.distillation is None and short.scanning is None
