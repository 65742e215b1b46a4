"""Photon-number distribution behind a beam splitter for Fock-state inputs.

The detected mode is ``b = sqrt(eta) a_I + sqrt(1 - eta) a_n``. For input
``|m, n>`` the probability of ``k`` photons in ``b`` is
``|<k, m+n-k| U |m, n>|^2``.

Two float routes are provided. ``method="eigen"`` uses that, restricted to
``m + n`` photons, the input number operator ``a_I^dag a_I`` is tridiagonal
in the output Fock basis with eigenvalues ``0 .. m + n``; the input state is
its eigenvector for eigenvalue ``m``. Unit eigenvalue gaps make inverse
iteration well conditioned, so the result is accurate to about
``(m + n) * eps`` for any photon number. ``method="logsum"`` evaluates the textbook
alternating binomial sum from log-factorials with compensated summation; it
is exact in exact arithmetic but loses roughly ``(m + n) / 2`` bits to
cancellation, so it is only trustworthy for small inputs. An exact rational
enumeration is available for testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .._validation import check_count, check_unit_interval

__all__ = ["PHOTON_CAP", "FockDistribution", "bs_output_distribution", "bs_output_exact"]

PHOTON_CAP = 4096


@dataclass(frozen=True)
class FockDistribution:
    probs: np.ndarray
    inputs: tuple
    transmittance: float

    @property
    def support(self) -> np.ndarray:
        return np.arange(len(self.probs))

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    def variance(self) -> float:
        k = self.support
        mu = self.mean()
        return float(np.dot((k - mu) ** 2, self.probs))


def _eigen_probs(m: int, n: int, eta: float) -> np.ndarray:
    size = m + n
    if size == 0:
        return np.ones(1)
    t2, r2 = eta, 1.0 - eta
    k = np.arange(size + 1, dtype=float)
    # n_I = t^2 n_b + r^2 n_c - t r (b^dag c + c^dag b) on the (m + n)-photon block
    diag = t2 * k + r2 * (size - k)
    off = -math.sqrt(t2 * r2) * np.sqrt((k[:-1] + 1.0) * (size - k[:-1]))
    if not np.any(off):
        probs = np.zeros(size + 1)
        probs[int(np.argmin(np.abs(diag - m)))] = 1.0
        return probs
    _, vec = eigh_tridiagonal(diag, off, select="i", select_range=(m, m))
    probs = vec[:, 0] ** 2
    return probs / math.fsum(probs)


def _logsum_probs(m: int, n: int, eta: float) -> np.ndarray:
    size = m + n
    probs = np.zeros(size + 1)
    if eta in (0.0, 1.0):
        probs[n if eta == 0.0 else m] = 1.0
        return probs
    log_t = 0.5 * math.log(eta)
    log_r = 0.5 * math.log1p(-eta)
    lf = gammaln(np.arange(size + 2) + 1.0)
    for k in range(size + 1):
        prefactor = 0.5 * (lf[k] + lf[size - k] - lf[m] - lf[n])
        terms = []
        for j in range(max(0, k - n), min(m, k) + 1):
            l = k - j
            log_mag = (
                lf[m] - lf[j] - lf[m - j]
                + lf[n] - lf[l] - lf[n - l]
                + log_t * (j + (n - l)) + log_r * ((m - j) + l)
                + prefactor
            )
            sign = -1.0 if (m - j) % 2 else 1.0
            terms.append(sign * math.exp(log_mag))
        probs[k] = math.fsum(terms) ** 2
    return probs


@lru_cache(maxsize=65536)
def _cached(m: int, n: int, eta: float, method: str) -> np.ndarray:
    if method == "eigen":
        probs = _eigen_probs(m, n, eta)
    elif method == "logsum":
        probs = _logsum_probs(m, n, eta)
    else:
        raise ValueError(f"unknown method {method!r}")
    probs.setflags(write=False)
    return probs


def bs_output_distribution(m, n, eta, method: str = "eigen", cap: int = PHOTON_CAP) -> FockDistribution:
    """Photon-number distribution of the detected port for input ``|m, n>``.

    Raises
    ------
    ValueError
        If ``m + n`` exceeds ``cap``.
    """
    m = check_count(m, "m")
    n = check_count(n, "n")
    eta = check_unit_interval(eta, "eta")
    if m + n > cap:
        raise ValueError(f"m + n = {m + n} exceeds the photon cap {cap}")
    return FockDistribution(probs=_cached(m, n, eta, method), inputs=(m, n), transmittance=eta)


def bs_output_exact(m: int, n: int, eta: Fraction) -> list[Fraction]:
    """Exact probabilities for rational ``eta``, by enumeration of the binomial sum.

    With ``t^2 = eta`` and ``r^2 = 1 - eta`` every amplitude is a common
    irrational factor times a rational sum, so the squared modulus is
    rational.
    """
    eta = Fraction(eta)
    if not 0 <= eta <= 1:
        raise ValueError("eta must lie in [0, 1]")
    size = m + n
    if eta in (0, 1):
        out = [Fraction(0)] * (size + 1)
        out[n if eta == 0 else m] = Fraction(1)
        return out
    rho = 1 - eta
    out = []
    for k in range(size + 1):
        s = Fraction(0)
        for j in range(max(0, k - n), min(m, k) + 1):
            l = k - j
            # amplitude / (t^(n-k) r^(m+k)) = sum_j binom * (-1)^(m-j) * t^(2j) r^(-2j)
            s += math.comb(m, j) * math.comb(n, l) * (-1) ** (m - j) * (eta / rho) ** j
        weight = Fraction(math.factorial(k) * math.factorial(size - k), math.factorial(m) * math.factorial(n))
        out.append(weight * eta ** (n - k) * rho ** (m + k) * s * s)
    return out
