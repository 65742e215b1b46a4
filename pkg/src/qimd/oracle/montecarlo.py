"""Seeded Monte-Carlo experiments that check the analytic formulas.

Every setting (for :func:`simulate_detected_counts`) or trial (for the
estimator experiments) draws from its own generator, seeded from the master
seed and its index with :class:`numpy.random.SeedSequence`. Work can therefore
be split across any number of workers without changing a single draw, and
results are assembled in index order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .._validation import check_count
from ..analytics import ScanPlan, _distill, _wrap, distillation_uncertainty, single_point_uncertainty
from ..exceptions import RegimeViolationError
from ..fringe import FringeModel, InterferometerSpec, NoiseChannel, PhotonStatistics, derive_fringe
from .sampling import sample_detected

__all__ = [
    "LINEARITY_GATE",
    "MeasurementRecord",
    "EmpiricalEstimate",
    "MCResult",
    "trial_rng",
    "model_inputs",
    "simulate_detected_counts",
    "simulate_model_counts",
    "appendix_variance",
    "mc_distillation",
    "mc_working_point",
]

LINEARITY_GATE = 0.1  # rad, largest predicted estimator spread
MAX_FAILURE_RATE = 1e-3
MAX_CLAMP_RATE = 1e-2

# stream identifiers keep the experiments' random streams disjoint
_STREAM_COUNTS = 0
_STREAM_DISTILL = 1
_STREAM_WP = 2
_STREAM_TRUTH = 3


def trial_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class MeasurementRecord:
    seed: int
    settings: np.ndarray
    shots_per_setting: int
    counts: np.ndarray

    def __post_init__(self):
        self.settings = np.asarray(self.settings, dtype=float)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (len(self.settings), self.shots_per_setting):
            raise ValueError("counts must have shape (settings, shots_per_setting)")

    def estimates(self) -> list["EmpiricalEstimate"]:
        return [EmpiricalEstimate.from_samples(row) for row in self.counts]

    def to_csv(self, stream, config_hash: str | None = None):
        if config_hash is not None:
            stream.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["setting_index", "shot_index", "count"])
        for j, row in enumerate(self.counts):
            for r, k in enumerate(row):
                writer.writerow([j, r, int(k)])

    def to_csv_string(self, config_hash: str | None = None) -> str:
        buf = io.StringIO()
        self.to_csv(buf, config_hash)
        return buf.getvalue()

    def sidecar(self, config_hash: str | None = None) -> dict:
        return {
            "seed": self.seed,
            "config_hash": config_hash,
            "settings": [float(x) for x in self.settings],
            "shots_per_setting": self.shots_per_setting,
        }

    def sidecar_json(self, config_hash: str | None = None) -> str:
        return json.dumps(self.sidecar(config_hash), sort_keys=True, indent=2)


@dataclass(frozen=True)
class EmpiricalEstimate:
    mean: float
    variance: float
    stderr_mean: float
    stderr_variance: float
    samples: int

    @classmethod
    def from_samples(cls, x) -> "EmpiricalEstimate":
        x = np.asarray(x, dtype=float).ravel()
        n = x.size
        if n < 2:
            raise ValueError("need at least two samples")
        mean = float(np.mean(x))
        dev = x - mean
        var = float(np.dot(dev, dev) / (n - 1))
        m4 = float(np.mean(dev**4))
        # sampling variance of the unbiased variance estimator
        var_of_var = (m4 - var * var * (n - 3) / (n - 1)) / n
        return cls(
            mean=mean,
            variance=var,
            stderr_mean=math.sqrt(var / n),
            stderr_variance=math.sqrt(max(var_of_var, 0.0)),
            samples=n,
        )

    def z_variance(self, expected: float) -> float:
        return (self.variance - expected) / self.stderr_variance

    def z_mean(self, expected: float) -> float:
        return (self.mean - expected) / self.stderr_mean


@dataclass(frozen=True)
class MCResult:
    estimate: EmpiricalEstimate
    predicted: float
    true_phase: float
    failures: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def relative_error(self) -> float:
        return self.estimate.variance / self.predicted - 1.0


def model_inputs(model: FringeModel, phi) -> tuple[np.ndarray, float]:
    """Beam-splitter input photon numbers that reproduce ``model`` at ``phi``."""
    signal = np.asarray(model.signal(phi), dtype=float)
    if model.eta == 0.0:
        raise ValueError("eta = 0 transmits no interferometer signal")
    mean_i = signal / model.eta
    if model.eta < 1.0:
        mean_n = model.noise_mean / (1.0 - model.eta)
    elif model.noise_mean == 0.0:
        mean_n = 0.0
    else:
        raise ValueError("eta = 1 admits no detected noise")
    return mean_i, mean_n


def _chunks(n, workers):
    bounds = np.linspace(0, n, max(1, min(workers, n)) + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _run(fn, n, workers, *args):
    blocks = _chunks(n, workers)
    if workers <= 1 or len(blocks) == 1:
        parts = [fn(block, *args) for block in blocks]
    else:
        parts = Parallel(n_jobs=workers)(delayed(fn)(block, *args) for block in blocks)
    return np.concatenate(parts, axis=0) if parts else np.empty(0)


def _counts_block(block, seed, means_i, stats_i, mean_n, stats_n, eta, shots, method):
    rows = []
    for j in block:
        rng = trial_rng(seed, _STREAM_COUNTS, j)
        rows.append(sample_detected(means_i[j], stats_i, mean_n, stats_n, eta, shots, rng, method))
    return np.array(rows, dtype=np.int64).reshape(len(block), shots)


def simulate_detected_counts(
    mean_signal,
    stats_signal,
    mean_noise,
    stats_noise,
    eta,
    settings,
    shots,
    seed,
    method: str = "fock",
    workers: int = 1,
) -> MeasurementRecord:
    """Simulate ``shots`` detections at each phase setting.

    Parameters
    ----------
    mean_signal : callable or array_like
        Interferometer output ``<n_I>`` entering the beam splitter, either as a
        function of the setting phase or one value per setting.
    stats_signal, stats_noise : PhotonStatistics or str
    mean_noise : float
        Noise photons ``<n>`` entering the other beam-splitter port.
    eta : float
        Transmittance for the interferometer signal.
    settings : array_like
        Phase settings.
    shots : int
    seed : int
    method : {"fock", "glauber"}
    workers : int
        Settings are simulated in parallel; output does not depend on it.
    """
    settings = np.atleast_1d(np.asarray(settings, dtype=float))
    shots = check_count(shots, "shots", minimum=1)
    if callable(mean_signal):
        means_i = np.array([float(mean_signal(p)) for p in settings])
    else:
        means_i = np.broadcast_to(np.asarray(mean_signal, dtype=float), settings.shape).copy()
    stats_i = PhotonStatistics.parse(stats_signal)
    stats_n = PhotonStatistics.parse(stats_noise)
    counts = _run(
        _counts_block, len(settings), workers,
        int(seed), means_i, stats_i, float(mean_noise), stats_n, float(eta), shots, method,
    )
    return MeasurementRecord(seed=int(seed), settings=settings, shots_per_setting=shots, counts=counts)


def simulate_model_counts(model: FringeModel, settings, shots, seed, method="fock", workers=1) -> MeasurementRecord:
    """Counts for a fringe model, with beam-splitter inputs reconstructed from it."""
    settings = np.atleast_1d(np.asarray(settings, dtype=float))
    mean_i, mean_n = model_inputs(model, settings)
    return simulate_detected_counts(
        mean_i, model.stats_phi, mean_n, model.stats_n, model.eta, settings, shots, seed, method, workers
    )


def appendix_variance(mean_i, var_i, mean_n, var_n, eta) -> float:
    """Detected count variance from the second moments of independent inputs.

    Expands ``<(b^dag b)^2> - <b^dag b>^2`` for ``b = t a_I + r a_n`` with
    number-diagonal inputs, where every cross term without matching creation
    and annihilation operators averages to zero.
    """
    eta = float(eta)
    rho = 1.0 - eta
    second_i = var_i + mean_i * mean_i
    second_n = var_n + mean_n * mean_n
    mean = eta * mean_i + rho * mean_n
    return math.fsum(
        [
            eta * eta * second_i,
            rho * rho * second_n,
            2.0 * eta * rho * mean_i * mean_n,
            eta * rho * (mean_i * (mean_n + 1.0) + mean_n * (mean_i + 1.0)),
            -mean * mean,
        ]
    )


def _averaged_block(block, seed, stream, means_i, stats_i, mean_n, stats_n, eta, shots, method):
    out = np.empty((len(block), len(means_i)))
    for row, trial in enumerate(block):
        rng = trial_rng(seed, stream, trial)
        for j, mi in enumerate(means_i):
            out[row, j] = sample_detected(mi, stats_i, mean_n, stats_n, eta, shots, rng, method).mean()
    return out


def _hidden_phase(seed) -> float:
    return float(trial_rng(seed, _STREAM_TRUTH, 0).uniform(-math.pi, math.pi))


def mc_distillation(
    spec: InterferometerSpec,
    noise: NoiseChannel,
    plan: ScanPlan,
    shots: int,
    trials: int,
    seed: int,
    true_phase: float | None = None,
    method: str = "glauber",
    workers: int = 1,
) -> MCResult:
    """Empirical variance of the distilled phase over repeated experiments.

    Each trial averages ``shots`` detections per setting and applies the
    distillation estimator; errors are wrapped into (-pi, pi] before the
    variance is taken. The analytic prediction is the distillation variance
    divided by ``shots``.

    Raises
    ------
    RegimeViolationError
        If the predicted spread exceeds :data:`LINEARITY_GATE`, or if more than
        0.1 % of trials give constant counts.
    """
    plan.require_distillation()
    shots = check_count(shots, "shots", minimum=1)
    trials = check_count(trials, "trials", minimum=2)
    model = derive_fringe(spec, noise)
    predicted = distillation_uncertainty(model, plan) / shots
    if math.sqrt(predicted) > LINEARITY_GATE:
        raise RegimeViolationError(
            f"predicted spread {math.sqrt(predicted):.3g} rad exceeds the {LINEARITY_GATE} rad linearity gate"
        )
    phi_true = _hidden_phase(seed) if true_phase is None else float(true_phase)
    means_i, mean_n = model_inputs(model, phi_true + plan.thetas())

    averaged = _run(
        _averaged_block, trials, workers,
        int(seed), _STREAM_DISTILL, means_i, model.stats_phi, mean_n, model.stats_n, model.eta, shots, method,
    )
    phases, dead = _distill(averaged, plan.thetas())
    failures = int(dead.sum())
    if failures > MAX_FAILURE_RATE * trials:
        raise RegimeViolationError(f"{failures} of {trials} trials carried no fringe information")
    errors = _wrap(phases[~dead] - phi_true)
    return MCResult(
        estimate=EmpiricalEstimate.from_samples(errors),
        predicted=predicted,
        true_phase=phi_true,
        failures=failures,
    )


def mc_working_point(
    model: FringeModel,
    phi: float,
    shots: int,
    trials: int,
    seed: int,
    method: str = "glauber",
    workers: int = 1,
) -> MCResult:
    """Empirical variance of fringe inversion at a single phase setting.

    Amplitude, contrast and noise are taken as known. Each trial averages
    ``shots`` detections at ``phi`` and inverts
    ``phi_hat = arccos((n_n + A - N) / (A C))`` on the branch of ``phi``.

    Raises
    ------
    RegimeViolationError
        If the predicted spread exceeds :data:`LINEARITY_GATE` or is not small
        compared with the distance to the nearest fringe extremum, or if more
        than 1 % of trials fall outside the invertible range.
    """
    shots = check_count(shots, "shots", minimum=1)
    trials = check_count(trials, "trials", minimum=2)
    phi = float(_wrap(phi))
    predicted = single_point_uncertainty(model, phi) / shots
    spread = math.sqrt(predicted)
    margin = min(abs(phi), math.pi - abs(phi))
    if spread > LINEARITY_GATE or spread > margin / 3.0:
        raise RegimeViolationError(
            f"predicted spread {spread:.3g} rad is too large for phase {phi:.3g} (gate {LINEARITY_GATE} rad)"
        )
    mean_i, mean_n = model_inputs(model, phi)
    averaged = _run(
        _averaged_block, trials, workers,
        int(seed), _STREAM_WP, np.atleast_1d(mean_i), model.stats_phi, mean_n, model.stats_n, model.eta,
        shots, method,
    )[:, 0]
    cosine = (model.noise_mean + model.amplitude - averaged) / (model.amplitude * model.contrast)
    clamped = int(np.sum(np.abs(cosine) > 1.0))
    if clamped > MAX_CLAMP_RATE * trials:
        raise RegimeViolationError(f"{clamped} of {trials} trials fell outside the invertible range")
    estimates = np.arccos(np.clip(cosine, -1.0, 1.0)) * (1.0 if phi >= 0 else -1.0)
    return MCResult(
        estimate=EmpiricalEstimate.from_samples(estimates - phi),
        predicted=predicted,
        true_phase=phi,
        failures=clamped,
    )
