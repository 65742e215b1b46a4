import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qimd.exceptions import DegenerateConfigurationError
from qimd.fringe import (
    MZI,
    NLI,
    FringeModel,
    NoiseChannel,
    PhotonStatistics,
    ZeroContrastWarning,
    derive_fringe,
    detected_variance,
    detected_variance_terms,
    fringe_mean,
    statistics_variance,
)

unit = st.floats(0.0, 1.0)
photons = st.floats(0.0, 1e4)
phases = st.floats(-20.0, 20.0)


def test_statistics_lambda():
    assert PhotonStatistics.POISSONIAN.lam == 0
    assert PhotonStatistics.THERMAL.lam == 1
    assert PhotonStatistics.parse("Thermal") is PhotonStatistics.THERMAL
    assert PhotonStatistics.parse("poisson") is PhotonStatistics.POISSONIAN
    with pytest.raises(ValueError):
        PhotonStatistics.parse("squeezed")


@pytest.mark.parametrize(
    "stats, n, expected",
    [("poissonian", 3.0, 3.0), ("thermal", 3.0, 12.0), ("poissonian", 0.0, 0.0), ("thermal", 0.0, 0.0)],
)
def test_statistics_variance(stats, n, expected):
    assert statistics_variance(PhotonStatistics.parse(stats), n) == expected


def test_balanced_mzi():
    m = derive_fringe(MZI(n0=4, T1=0.5, T2=0.5), NoiseChannel(eta=1.0, mean_noise=0.0))
    assert m.amplitude == 2.0
    assert m.contrast == 1.0
    assert m.noise_mean == 0.0
    assert m.lambda_phi == 0


def test_balanced_nli():
    m = derive_fringe(NLI(n0=1, n0p=1), NoiseChannel(eta=0.5, mean_noise=0.0))
    assert m.amplitude == 2.0
    assert m.contrast == 1.0
    assert m.lambda_phi == 1


def test_unbalanced_nli_contrast():
    for eta in (0.1, 0.5, 1.0):
        m = derive_fringe(NLI(n0=1, n0p=2), NoiseChannel(eta=eta))
        assert m.contrast == pytest.approx(4.0 * math.sqrt(3.0) / 7.0, rel=1e-15)


def test_noise_channel_detected_noise():
    assert NoiseChannel(eta=0.25, mean_noise=8.0).detected_noise == 6.0
    with pytest.raises(ValueError):
        NoiseChannel(eta=1.5)
    with pytest.raises(ValueError):
        NoiseChannel(mean_noise=-1.0)


@pytest.mark.parametrize("spec", [MZI(n0=0.0), MZI(n0=5.0, T1=1.0, T2=0.0), NLI(n0=0.0, n0p=0.0)])
def test_zero_amplitude_rejected(spec):
    with pytest.raises(DegenerateConfigurationError):
        derive_fringe(spec)


def test_zero_contrast_flagged():
    with pytest.warns(ZeroContrastWarning):
        m = derive_fringe(MZI(n0=5.0, T1=1.0, T2=1.0))
    assert m.contrast == 0.0


@pytest.mark.parametrize(
    "model, phi, expected",
    [
        (FringeModel(1.0, 1.0), 0.0, 0.0),
        (FringeModel(1.0, 1.0), math.pi, 2.0),
        (FringeModel(2.0, 0.5, noise_mean=1.0), math.pi / 2, 3.0),
    ],
)
def test_fringe_mean_examples(model, phi, expected):
    assert fringe_mean(model, phi) == pytest.approx(expected, abs=1e-15)


def test_detected_variance_examples():
    # n_phi = 2, n_n = 1 from <n_I> = 4, <n> = 2 through eta = 1/2
    poisson = FringeModel(amplitude=1.0, contrast=1.0, noise_mean=1.0, eta=0.5)
    thermal = FringeModel(amplitude=1.0, contrast=1.0, noise_mean=1.0, eta=0.5, lambda_phi=1, lambda_n=1)
    assert detected_variance(poisson, math.pi) == pytest.approx(7.0)
    assert detected_variance(thermal, math.pi) == pytest.approx(12.0)
    assert detected_variance_terms(poisson, math.pi) == pytest.approx(7.0)
    assert detected_variance_terms(thermal, math.pi) == pytest.approx(12.0)
    shot = FringeModel(amplitude=3.7, contrast=0.6)
    assert detected_variance(shot, 1.1) == pytest.approx(fringe_mean(shot, 1.1), rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(t1=unit, t2=unit, n0=st.floats(1e-3, 1e4), eta=st.floats(1e-3, 1.0))
def test_mzi_contrast_bounded_and_product_form(t1, t2, n0, eta):
    spec = MZI(n0=n0, T1=t1, T2=t2)
    if spec.gamma * n0 * eta == 0.0:
        return
    m = derive_fringe(spec, NoiseChannel(eta=eta))
    assert 0.0 <= m.contrast <= 1.0
    product = 2.0 * math.sqrt(t1 * t2 * (1 - t1) * (1 - t2)) / spec.gamma
    assert m.contrast == pytest.approx(product, abs=1e-12)
    assert m.amplitude == pytest.approx(eta * spec.gamma * n0, rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(n0=st.floats(1e-4, 1e4), n0p=st.floats(1e-4, 1e4), eta=st.floats(1e-3, 1.0))
def test_nli_contrast_independent_of_eta(n0, n0p, eta):
    spec = NLI(n0=n0, n0p=n0p)
    a = derive_fringe(spec, NoiseChannel(eta=eta))
    b = derive_fringe(spec, NoiseChannel(eta=1.0))
    assert a.contrast == b.contrast
    assert 0.0 <= a.contrast <= 1.0
    product = 2.0 * math.sqrt(n0 * n0p * (n0 + 1) * (n0p + 1)) / spec.total_gain
    assert a.contrast == pytest.approx(product, abs=1e-12)


def test_perfect_contrast_condition():
    assert derive_fringe(MZI(n0=3.0)).contrast == 1.0
    assert derive_fringe(NLI(n0=3.0, n0p=3.0)).contrast == 1.0
    assert derive_fringe(NLI(n0=3.0, n0p=3.5)).contrast < 1.0
    # unbalanced pairs with T1 + T2 = 1 also give full modulation
    assert derive_fringe(MZI(n0=3.0, T1=0.25, T2=0.75)).contrast == 1.0
    assert derive_fringe(MZI(n0=3.0, T1=0.2, T2=0.8)).contrast == pytest.approx(1.0, abs=1e-15)
    assert derive_fringe(MZI(n0=3.0, T1=0.2, T2=0.7)).contrast < 1.0


models = st.builds(
    FringeModel,
    amplitude=st.floats(1e-3, 1e5),
    contrast=unit,
    noise_mean=photons,
    eta=st.floats(1e-3, 1.0 - 1e-3),
    lambda_phi=st.sampled_from([0, 1]),
    lambda_n=st.sampled_from([0, 1]),
)


@settings(max_examples=300, deadline=None)
@given(model=models, phi=phases)
def test_variance_paths_agree(model, phi):
    reduced = detected_variance(model, phi)
    terms = detected_variance_terms(model, phi)
    assert terms == pytest.approx(reduced, rel=1e-12, abs=1e-300)


@settings(max_examples=300, deadline=None)
@given(model=models, phi=phases)
def test_fringe_symmetry_and_excess(model, phi):
    total = fringe_mean(model, phi) + fringe_mean(model, phi + math.pi)
    assert total == pytest.approx(2.0 * (model.noise_mean + model.amplitude), rel=1e-12)
    n_phi = model.signal(phi)
    nn = model.noise_mean
    excess = detected_variance(model, phi) - fringe_mean(model, phi)
    expected = model.lambda_phi * n_phi**2 + model.lambda_n * nn**2 + 2 * n_phi * nn
    assert excess >= -1e-9 * max(1.0, expected)
    assert excess == pytest.approx(expected, rel=1e-9, abs=1e-9 * fringe_mean(model, phi) + 1e-12)


def test_periodicity():
    m = FringeModel(2.3, 0.7, noise_mean=0.4, lambda_phi=1)
    phi = np.linspace(-3, 3, 11)
    assert np.allclose(fringe_mean(m, phi), fringe_mean(m, phi + 2 * np.pi), rtol=1e-13)
