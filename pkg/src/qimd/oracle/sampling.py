"""Photon-number samplers and the per-shot detection model.

Two exact samplers of the detected count are provided for number-diagonal
inputs mixed on a beam splitter:

``fock``
    Draw input photon numbers ``m`` and ``n`` from their statistics, then
    draw the output count from the Fock-state beam-splitter distribution.
``glauber``
    Draw the inputs as coherent amplitudes from their Glauber-Sudarshan
    P-function (fixed modulus with random phase for Poissonian light, complex
    Gaussian for thermal light), mix the amplitudes on the beam splitter and
    count with a Poisson draw. Both inputs have non-negative P-functions, so
    this produces the same count distribution as the Fock route at a cost
    independent of the photon number.
"""

from __future__ import annotations

import numpy as np

from ..fringe import PhotonStatistics
from .fock import PHOTON_CAP, bs_output_distribution

__all__ = ["sample_photon_number", "sample_detected", "SAMPLERS"]

SAMPLERS = ("fock", "glauber")


def sample_photon_number(stats, mean, rng: np.random.Generator, size=None):
    """Draw photon numbers with the given statistics and mean.

    Thermal draws use the closed-form inverse CDF of
    ``P(n) = mean^n / (1 + mean)^(n + 1)``.
    """
    stats = PhotonStatistics.parse(stats)
    mean = float(mean)
    if mean < 0:
        raise ValueError("mean must be >= 0")
    if stats is PhotonStatistics.POISSONIAN:
        return rng.poisson(mean, size=size)
    if mean == 0.0:
        return np.zeros(size, dtype=np.int64) if size is not None else 0
    u = 1.0 - rng.random(size)  # (0, 1]
    out = np.floor(np.log(u) / np.log(mean / (1.0 + mean))).astype(np.int64)
    return out if size is not None else int(out)


def _p_amplitude(stats: PhotonStatistics, mean: float, rng, size):
    if stats is PhotonStatistics.POISSONIAN:
        return np.sqrt(mean) * np.exp(2j * np.pi * rng.random(size))
    scale = np.sqrt(mean / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def _sample_glauber(mean_i, stats_i, mean_n, stats_n, eta, shots, rng):
    alpha = _p_amplitude(stats_i, mean_i, rng, shots)
    beta = _p_amplitude(stats_n, mean_n, rng, shots)
    out = np.sqrt(eta) * alpha + np.sqrt(1.0 - eta) * beta
    return rng.poisson(np.abs(out) ** 2)


def _sample_fock(mean_i, stats_i, mean_n, stats_n, eta, shots, rng, cap):
    m = np.asarray(sample_photon_number(stats_i, mean_i, rng, shots))
    n = np.asarray(sample_photon_number(stats_n, mean_n, rng, shots))
    u = rng.random(shots)
    if np.any(m + n > cap):
        raise ValueError(f"sampled photon number exceeds the cap {cap}")
    out = np.empty(shots, dtype=np.int64)
    pairs, inverse = np.unique(np.stack([m, n], axis=1), axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    for idx, (mi, ni) in enumerate(pairs):
        sel = inverse == idx
        cdf = np.cumsum(bs_output_distribution(int(mi), int(ni), eta, cap=cap).probs)
        k = np.searchsorted(cdf, u[sel] * cdf[-1], side="right")
        out[sel] = np.minimum(k, len(cdf) - 1)
    return out


def sample_detected(
    mean_i,
    stats_i,
    mean_n,
    stats_n,
    eta,
    shots,
    rng: np.random.Generator,
    method: str = "fock",
    cap: int = PHOTON_CAP,
):
    """Detected counts for ``shots`` independent repetitions of one setting.

    ``mean_i`` and ``mean_n`` are the photon numbers entering the beam
    splitter; the detected mean is ``eta * mean_i + (1 - eta) * mean_n``.
    """
    stats_i = PhotonStatistics.parse(stats_i)
    stats_n = PhotonStatistics.parse(stats_n)
    if method == "glauber":
        return _sample_glauber(mean_i, stats_i, mean_n, stats_n, eta, shots, rng)
    if method == "fock":
        return _sample_fock(mean_i, stats_i, mean_n, stats_n, eta, shots, rng, cap)
    raise ValueError(f"method must be one of {SAMPLERS}, got {method!r}")
