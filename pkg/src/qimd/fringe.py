"""Interferometer configurations and their reduction to a noisy fringe.

Every configuration handled here ends up as the same three-parameter fringe,
``N(phi) = n_n + A * (1 - C cos(phi))``, plus two flags recording whether the
interferometer output and the admixed noise are Poissonian or thermal.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ._validation import check_nonnegative, check_unit_interval
from .exceptions import DegenerateConfigurationError

__all__ = [
    "PhotonStatistics",
    "MZI",
    "NLI",
    "InterferometerSpec",
    "NoiseChannel",
    "FringeModel",
    "ZeroContrastWarning",
    "derive_fringe",
    "fringe_mean",
    "detected_variance",
    "detected_variance_terms",
    "statistics_variance",
]


class ZeroContrastWarning(RuntimeWarning):
    """The derived fringe has no modulation; uncertainty formulas will reject it."""


class PhotonStatistics(enum.Enum):
    POISSONIAN = "poissonian"
    THERMAL = "thermal"

    @property
    def lam(self) -> int:
        """Excess-noise flag: variance is ``n (1 + lam * n)``."""
        return 0 if self is PhotonStatistics.POISSONIAN else 1

    @classmethod
    def parse(cls, value) -> "PhotonStatistics":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"poisson": "poissonian", "coherent": "poissonian", "bose": "thermal"}
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class MZI:
    """Mach-Zehnder interferometer fed by a laser with ``n0`` mean photons."""

    n0: float
    T1: float = 0.5
    T2: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "n0", check_nonnegative(self.n0, "n0"))
        object.__setattr__(self, "T1", check_unit_interval(self.T1, "T1"))
        object.__setattr__(self, "T2", check_unit_interval(self.T2, "T2"))

    @property
    def statistics(self) -> PhotonStatistics:
        return PhotonStatistics.POISSONIAN

    @property
    def gamma(self) -> float:
        return self.T1 * self.T2 + (1.0 - self.T1) * (1.0 - self.T2)

    @property
    def probe_photons(self) -> float:
        return self.n0


@dataclass(frozen=True)
class NLI:
    """Unseeded SU(1,1) interferometer with squeezer gains ``n0`` and ``n0p``."""

    n0: float
    n0p: float

    def __post_init__(self):
        object.__setattr__(self, "n0", check_nonnegative(self.n0, "n0"))
        object.__setattr__(self, "n0p", check_nonnegative(self.n0p, "n0p"))

    @property
    def statistics(self) -> PhotonStatistics:
        return PhotonStatistics.THERMAL

    @property
    def total_gain(self) -> float:
        return self.n0 + self.n0p + 2.0 * self.n0 * self.n0p

    @property
    def probe_photons(self) -> float:
        return self.n0


InterferometerSpec = Union[MZI, NLI]


@dataclass(frozen=True)
class NoiseChannel:
    """Beam splitter of transmittance ``eta`` that mixes in incoherent noise."""

    eta: float = 1.0
    mean_noise: float = 0.0
    stats: PhotonStatistics = PhotonStatistics.POISSONIAN

    def __post_init__(self):
        object.__setattr__(self, "eta", check_unit_interval(self.eta, "eta"))
        object.__setattr__(self, "mean_noise", check_nonnegative(self.mean_noise, "mean_noise"))
        object.__setattr__(self, "stats", PhotonStatistics.parse(self.stats))

    @property
    def detected_noise(self) -> float:
        return (1.0 - self.eta) * self.mean_noise


@dataclass(frozen=True)
class FringeModel:
    """Reduced description ``N(phi) = noise_mean + amplitude * (1 - contrast cos phi)``.

    ``contrast_deficit`` holds ``1 - contrast**2``. When a model is derived from
    a physical configuration it is computed in closed form, which keeps it
    exactly zero for balanced setups; otherwise it is filled in from
    ``contrast``.
    """

    amplitude: float
    contrast: float
    noise_mean: float = 0.0
    eta: float = 1.0
    lambda_phi: int = 0
    lambda_n: int = 0
    contrast_deficit: float = field(default=None)

    def __post_init__(self):
        amplitude = check_nonnegative(self.amplitude, "amplitude")
        if amplitude == 0.0:
            raise DegenerateConfigurationError("fringe amplitude is zero")
        object.__setattr__(self, "amplitude", amplitude)
        object.__setattr__(self, "contrast", check_unit_interval(self.contrast, "contrast"))
        object.__setattr__(self, "noise_mean", check_nonnegative(self.noise_mean, "noise_mean"))
        object.__setattr__(self, "eta", check_unit_interval(self.eta, "eta"))
        for name in ("lambda_phi", "lambda_n"):
            flag = getattr(self, name)
            if flag not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1, got {flag!r}")
            object.__setattr__(self, name, int(flag))
        if self.contrast_deficit is None:
            c = self.contrast
            object.__setattr__(self, "contrast_deficit", (1.0 - c) * (1.0 + c))
        else:
            object.__setattr__(
                self, "contrast_deficit", check_unit_interval(self.contrast_deficit, "contrast_deficit")
            )

    @property
    def xi(self) -> float:
        """Detected noise in units of the fringe amplitude."""
        return self.noise_mean / self.amplitude

    @property
    def contrast_sq(self) -> float:
        return 1.0 - self.contrast_deficit

    @property
    def stats_phi(self) -> PhotonStatistics:
        return PhotonStatistics.THERMAL if self.lambda_phi else PhotonStatistics.POISSONIAN

    @property
    def stats_n(self) -> PhotonStatistics:
        return PhotonStatistics.THERMAL if self.lambda_n else PhotonStatistics.POISSONIAN

    def signal(self, phi):
        """Detected interferometer fraction ``n_phi``; no noise included."""
        phi = np.asarray(phi, dtype=float)
        c = self.contrast
        # (1 - C) + 2C sin^2(phi/2) avoids cancellation near the dark fringe
        out = self.amplitude * ((1.0 - c) + 2.0 * c * np.sin(0.5 * phi) ** 2)
        return out if out.ndim else float(out)


def derive_fringe(spec: InterferometerSpec, noise: NoiseChannel | None = None) -> FringeModel:
    """Reduce an interferometer plus noise channel to its fringe model.

    Raises
    ------
    DegenerateConfigurationError
        If the configuration produces no signal at all (``A = 0``).
    """
    noise = NoiseChannel() if noise is None else noise
    eta = noise.eta
    if isinstance(spec, MZI):
        gamma = spec.gamma
        amplitude = eta * gamma * spec.n0
        if amplitude == 0.0:
            raise DegenerateConfigurationError(
                f"MZI produces no signal (eta={eta}, gamma={gamma}, n0={spec.n0})"
            )
        t1, t2 = spec.T1, spec.T2
        # T1 + T2 - 1 written as a difference of products keeps tiny T's exact
        deficit = ((t1 * t2 - (1.0 - t1) * (1.0 - t2)) / gamma) ** 2
        product = 2.0 * math.sqrt(t1 * t2) * math.sqrt((1.0 - t1) * (1.0 - t2)) / gamma
    elif isinstance(spec, NLI):
        total = spec.total_gain
        amplitude = eta * total
        if amplitude == 0.0:
            raise DegenerateConfigurationError(
                f"NLI produces no signal (eta={eta}, n0={spec.n0}, n0p={spec.n0p})"
            )
        deficit = ((spec.n0 - spec.n0p) / total) ** 2
        n0, n0p = spec.n0, spec.n0p
        product = 2.0 * math.sqrt(n0 * n0p) * math.sqrt((n0 + 1.0) * (n0p + 1.0)) / total
    else:
        raise TypeError(f"unsupported interferometer spec {spec!r}")

    # C from the product form stays accurate as C -> 0, 1 - C^2 from the
    # difference form as C -> 1
    deficit = min(deficit, 1.0)
    contrast = 1.0 if deficit == 0.0 else min(product, 1.0)
    if contrast == 0.0:
        warnings.warn("derived fringe has zero contrast", ZeroContrastWarning, stacklevel=2)
    return FringeModel(
        amplitude=amplitude,
        contrast=contrast,
        noise_mean=noise.detected_noise,
        eta=eta,
        lambda_phi=spec.statistics.lam,
        lambda_n=noise.stats.lam,
        contrast_deficit=deficit,
    )


def fringe_mean(model: FringeModel, phi):
    """Mean detected counts ``N(phi)``."""
    return model.noise_mean + model.signal(phi)


def statistics_variance(stats: PhotonStatistics, mean):
    stats = PhotonStatistics.parse(stats)
    mean = np.asarray(mean, dtype=float)
    if np.any(mean < 0):
        raise ValueError("mean photon number must be >= 0")
    out = mean * (1.0 + stats.lam * mean)
    return out if out.ndim else float(out)


def detected_variance(model: FringeModel, phi, covariance=0.0):
    """Variance of the detected counts at total phase ``phi``.

    Uses the regrouped form
    ``n_phi (1 + lam_phi n_phi) + n_n (1 + lam_n n_n) + 2 n_phi n_n``; the
    covariance between signal and noise enters with weight four and is zero
    for independent sources.
    """
    n_phi = np.asarray(model.signal(phi), dtype=float)
    n_n = model.noise_mean
    out = (
        n_phi * (1.0 + model.lambda_phi * n_phi)
        + n_n * (1.0 + model.lambda_n * n_n)
        + 2.0 * n_phi * n_n
        + 4.0 * covariance
    )
    return out if out.ndim else float(out)


def detected_variance_terms(model: FringeModel, phi, covariance=0.0):
    """Same variance, assembled from the individual beam-splitter terms.

    The raw interferometer output ``<n_I> = n_phi / eta`` and noise
    ``<n> = n_n / (1 - eta)`` are reconstructed and their variances and means
    are pushed through the beam splitter term by term. Kept separate from
    :func:`detected_variance` so the two can be checked against each other.
    """
    eta = model.eta
    n_phi = np.asarray(model.signal(phi), dtype=float)
    n_n = model.noise_mean

    if eta > 0.0:
        mean_i = n_phi / eta
        var_phi = eta**2 * statistics_variance(model.stats_phi, mean_i)
    else:
        var_phi = np.zeros_like(n_phi)
    if eta < 1.0:
        mean_n = n_n / (1.0 - eta)
        var_n = (1.0 - eta) ** 2 * statistics_variance(model.stats_n, mean_n)
    elif n_n == 0.0:
        var_n = 0.0
    else:
        raise ValueError("eta = 1 admits no detected noise")

    out = var_phi + var_n + 2.0 * n_phi * n_n + (1.0 - eta) * n_phi + eta * n_n + 4.0 * covariance
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)
