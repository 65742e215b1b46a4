from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qimd.oracle.fock import PHOTON_CAP, bs_output_distribution, bs_output_exact


def test_single_photon():
    for eta in (0.0, 0.2, 0.5, 1.0):
        d = bs_output_distribution(1, 0, eta)
        assert np.allclose(d.probs, [1 - eta, eta], atol=1e-15)


def test_hong_ou_mandel():
    d = bs_output_distribution(1, 1, 0.5)
    assert np.allclose(d.probs, [0.5, 0.0, 0.5], atol=1e-12)
    assert bs_output_exact(1, 1, Fraction(1, 2)) == [Fraction(1, 2), 0, Fraction(1, 2)]


@pytest.mark.parametrize("m", [1, 5, 17, 40])
@pytest.mark.parametrize("eta", [0.1, 0.5, 0.83])
def test_no_partner_is_binomial(m, eta):
    d = bs_output_distribution(m, 0, eta)
    binom = np.array([comb(m, k) * eta**k * (1 - eta) ** (m - k) for k in range(m + 1)])
    assert np.allclose(d.probs, binom, rtol=1e-10, atol=1e-15)


@pytest.mark.parametrize("method", ["eigen", "logsum"])
def test_against_exact_enumeration(method):
    for eta in (Fraction(1, 3), Fraction(1, 2), Fraction(7, 10)):
        for m in range(6):
            for n in range(6):
                exact = np.array([float(p) for p in bs_output_exact(m, n, eta)])
                got = bs_output_distribution(m, n, float(eta), method=method).probs
                assert np.allclose(got, exact, rtol=0, atol=1e-13)


def test_exact_enumeration_is_normalised():
    for m, n in [(3, 4), (5, 5), (0, 7)]:
        assert sum(bs_output_exact(m, n, Fraction(2, 7))) == 1


def test_port_symmetry():
    # swapping inputs is the same as swapping transmittance and reflectance
    a = bs_output_distribution(7, 3, 0.3).probs
    b = bs_output_distribution(3, 7, 0.7).probs
    assert np.allclose(a, b, atol=1e-14)


def test_cap():
    with pytest.raises(ValueError):
        bs_output_distribution(PHOTON_CAP, 1, 0.5)
    with pytest.raises(ValueError):
        bs_output_distribution(10, 10, 0.5, cap=15)
    with pytest.raises(ValueError):
        bs_output_distribution(-1, 0, 0.5)
    with pytest.raises(ValueError):
        bs_output_distribution(1, 0, 1.2)


def test_read_only_cache():
    d = bs_output_distribution(4, 2, 0.5)
    with pytest.raises(ValueError):
        d.probs[0] = 1.0


@settings(max_examples=150, deadline=None)
@given(m=st.integers(0, 60), n=st.integers(0, 60), eta=st.floats(0.0, 1.0))
def test_moments(m, n, eta):
    d = bs_output_distribution(m, n, eta)
    assert np.all(d.probs >= 0)
    assert abs(d.probs.sum() - 1.0) < 1e-12
    assert d.mean() == pytest.approx(eta * m + (1 - eta) * n, abs=1e-10)
    assert d.variance() == pytest.approx(eta * (1 - eta) * (m + n + 2 * m * n), abs=1e-10)


def test_large_photon_numbers():
    d = bs_output_distribution(2000, 2000, 0.5)
    assert abs(d.probs.sum() - 1) < 1e-12
    assert d.mean() == pytest.approx(2000.0, rel=1e-12)
    assert d.variance() == pytest.approx(0.25 * (4000 + 2 * 2000 * 2000), rel=1e-9)
    # only even counts survive for equal inputs on a balanced splitter
    assert np.max(d.probs[1::2]) < 1e-12
