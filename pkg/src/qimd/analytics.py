"""Phase distillation and closed-form phase-uncertainty budget.

Conventions: ``steps`` is the number ``M`` of settings (distillation) or of
repeated measurements at a single setting (working point); all variances
are in rad^2 and refer to a single run of ``M`` measurements.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ._validation import check_count, check_nonnegative
from .exceptions import (
    ConsistencyError,
    DegenerateConfigurationError,
    NoFringeInformationError,
    StationaryPointError,
)
from .fringe import FringeModel, detected_variance, fringe_mean

__all__ = [
    "PIEZO_JITTER",
    "SLM_JITTER",
    "ScanPlan",
    "UncertaintyReport",
    "distill_phase",
    "intrinsic_uncertainty",
    "distillation_uncertainty",
    "distillation_uncertainty_sum",
    "distillation_residual",
    "scan_uncertainty",
    "scan_uncertainty_sum",
    "single_point_uncertainty",
    "wp_uncertainty_closed",
    "wp_phase_closed",
    "balanced_wp",
    "uncertainty_report",
]

# Tunable-phase jitter presets (rad): piezo mirror and spatial light modulator.
PIEZO_JITTER = 10e-3
SLM_JITTER = 50e-3

_STATIONARY_GUARD = 1e-12
_PHI1_CLAMP = 1e-12


@dataclass(frozen=True)
class ScanPlan:
    """Equally spaced tunable phases ``theta_j = 2 pi j / M``, ``j = 1..M``.

    ``steps`` below 3 is allowed so the same object can describe ``M``
    repeated measurements at the working point; distillation rejects it.
    """

    steps: int
    theta_jitter: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "steps", check_count(self.steps, "steps", minimum=1))
        object.__setattr__(self, "theta_jitter", check_nonnegative(self.theta_jitter, "theta_jitter"))

    def thetas(self) -> np.ndarray:
        j = np.arange(1, self.steps + 1)
        return 2.0 * np.pi * j / self.steps

    def require_distillation(self):
        if self.steps < 3:
            raise ValueError(f"distillation needs at least 3 steps, got {self.steps}")


@dataclass(frozen=True)
class UncertaintyReport:
    intrinsic: float
    distillation: float | None
    scanning: float | None
    working_point: float
    wp_phase: float
    phi1: float
    distillation_residual: float | None = None

    def to_dict(self):
        return asdict(self)


def _as_plan(plan) -> ScanPlan:
    return plan if isinstance(plan, ScanPlan) else ScanPlan(int(plan))


def _require_contrast(model: FringeModel):
    if model.contrast == 0.0:
        raise DegenerateConfigurationError("contrast is zero; phase uncertainty is unbounded")


def _wrap(phase):
    """Map phases to (-pi, pi]."""
    out = np.angle(np.exp(1j * np.asarray(phase, dtype=float)))
    return np.where(out <= -np.pi, np.pi, out)


def distill_phase(counts, plan: ScanPlan | int | None = None):
    """Estimate the object phase from ``M`` counts at equally spaced settings.

    Parameters
    ----------
    counts : array_like, shape (..., M)
        Detected counts ``N(phi + theta_j)``; leading axes are batched.
    plan : ScanPlan or int, optional
        Defaults to ``M`` taken from the last axis of ``counts``.

    Returns
    -------
    float or ndarray
        Phase in (-pi, pi].

    Raises
    ------
    NoFringeInformationError
        If the first-harmonic sums vanish (constant counts).
    """
    counts = np.asarray(counts, dtype=float)
    steps = counts.shape[-1]
    plan = ScanPlan(steps) if plan is None else _as_plan(plan)
    plan.require_distillation()
    if plan.steps != steps:
        raise ValueError(f"expected {plan.steps} counts per record, got {steps}")

    out, dead = _distill(counts, plan.thetas())
    if np.any(dead):
        raise NoFringeInformationError("counts have no first-harmonic component")
    return float(out) if out.ndim == 0 else out


def _distill(counts, theta):
    """Batched estimator; returns phases and a mask of undefined records."""
    s = counts @ np.sin(theta)
    d = counts @ np.cos(theta)
    scale = np.max(np.abs(counts), axis=-1) * len(theta)
    dead = np.hypot(s, d) <= 1e-12 * np.maximum(scale, np.finfo(float).tiny)
    return _wrap(np.arctan2(s, -d)), dead


def intrinsic_uncertainty(model: FringeModel) -> float:
    """Intrinsic phase variance ``1/2 [(1 + xi)/A + 2 xi + lam_n xi^2]``."""
    a = model.amplitude
    xi = model.xi
    return 0.5 * ((1.0 + xi) / a + 2.0 * xi + model.lambda_n * xi * xi)


def distillation_uncertainty(model: FringeModel, plan) -> float:
    """Closed-form variance of the distilled phase (exact for ``M >= 5``)."""
    plan = _as_plan(plan)
    plan.require_distillation()
    _require_contrast(model)
    m = plan.steps
    c2 = model.contrast_sq
    base = 4.0 * intrinsic_uncertainty(model) / (m * c2)
    return base + (1.0 + c2 / 4.0) * 2.0 * model.lambda_phi / (m * c2)


def distillation_uncertainty_sum(model: FringeModel, plan, true_phase: float = 0.0):
    """Distilled-phase variance by explicit error propagation over settings.

    Returns ``(explicit, averaged)``: the first sums squared estimator weights
    times the count variances; the second re-expresses each summand through
    the single-setting phase variance weighted by ``sin^4``. Both are
    computed independently and must agree to 1e-12 relative.
    """
    plan = _as_plan(plan)
    plan.require_distillation()
    _require_contrast(model)
    m = plan.steps
    ac = model.amplitude * model.contrast
    phi = true_phase + plan.thetas()
    sin = np.sin(phi)
    var_n = detected_variance(model, phi)

    explicit = 4.0 / (m * m * ac * ac) * math.fsum(sin**2 * var_n)

    safe = np.abs(sin) > 0.0
    single = np.zeros_like(sin)
    single[safe] = var_n[safe] / (ac * sin[safe]) ** 2
    weighted = np.where(safe, sin**4 * single, 0.0)
    averaged = 4.0 / (m * m) * math.fsum(weighted)

    if not math.isclose(explicit, averaged, rel_tol=1e-12, abs_tol=0.0):
        raise ConsistencyError(f"explicit sum {explicit!r} != averaged form {averaged!r}")
    return explicit, averaged


def distillation_residual(model: FringeModel, plan, grid: int = 721) -> float:
    """Largest relative gap between explicit sum and closed form over the true phase.

    Zero to round-off for ``M >= 5``; for ``M`` in {3, 4} harmonics of the
    count variance alias onto the estimator and a phase-dependent residual
    remains.
    """
    closed = distillation_uncertainty(model, plan)
    worst = 0.0
    for phase in np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False):
        explicit, _ = distillation_uncertainty_sum(model, plan, phase)
        worst = max(worst, abs(explicit - closed) / closed)
    return worst


def scan_uncertainty(model: FringeModel, plan) -> float:
    """Variance contributed by jitter ``theta_jitter`` of the tunable phase."""
    plan = _as_plan(plan)
    plan.require_distillation()
    _require_contrast(model)
    xi = model.xi
    c2 = model.contrast_sq
    bracket = 1.0 + 0.75 * c2 + 2.0 * xi + xi * xi
    return 2.0 / (plan.steps * c2) * bracket * plan.theta_jitter**2


def scan_uncertainty_sum(model: FringeModel, plan, true_phase: float = 0.0) -> float:
    """Explicit-sum counterpart of :func:`scan_uncertainty` (exact for ``M >= 5``)."""
    plan = _as_plan(plan)
    plan.require_distillation()
    _require_contrast(model)
    m = plan.steps
    ac = model.amplitude * model.contrast
    phi = true_phase + plan.thetas()
    weights = 2.0 * fringe_mean(model, phi) * np.cos(phi) / (m * ac)
    return math.fsum(weights**2) * plan.theta_jitter**2


def single_point_uncertainty(model: FringeModel, phi):
    """Phase variance of one measurement at total phase ``phi``.

    Raises
    ------
    StationaryPointError
        At ``phi = 0`` or ``pi`` (mod ``pi``), where the fringe slope vanishes.
    """
    _require_contrast(model)
    phi = np.asarray(phi, dtype=float)
    sin = np.sin(phi)
    if np.any(np.abs(sin) <= _STATIONARY_GUARD):
        raise StationaryPointError("fringe slope vanishes at phi = 0 or pi")
    out = detected_variance(model, phi) / (model.amplitude * model.contrast * sin) ** 2
    return float(out) if np.ndim(out) == 0 else out


def _phi1(model: FringeModel) -> float:
    a = model.amplitude
    xi = model.xi
    lp = model.lambda_phi
    c2 = model.contrast_sq
    d0 = intrinsic_uncertainty(model)
    u = xi * (1.0 / a + xi * model.lambda_n)
    noise_part = u * (4.0 * d0 + 4.0 * lp - u)
    contrast_part = model.contrast_deficit * ((1.0 / a + 2.0 * xi + 2.0 * lp) ** 2 - lp * (4.0 * d0 + c2 + 3.0))
    return noise_part + contrast_part


def wp_uncertainty_closed(model: FringeModel, plan) -> tuple[float, float]:
    """Minimal phase variance at the working point, ``M`` repeats.

    Returns
    -------
    (variance, phi1)
        ``phi1`` is the auxiliary quantity whose square root carries the noise
        and contrast penalty; it is clamped at zero against round-off.
    """
    plan = _as_plan(plan)
    _require_contrast(model)
    m = plan.steps
    c2 = model.contrast_sq
    phi1 = _phi1(model)
    if phi1 < -_PHI1_CLAMP:
        raise ConsistencyError(f"phi1 = {phi1!r} is negative beyond round-off")
    phi1 = max(phi1, 0.0)
    variance = (
        intrinsic_uncertainty(model) / (m * c2)
        + model.contrast_deficit * model.lambda_phi / (2.0 * m * c2)
        + math.sqrt(phi1) / (2.0 * m * c2)
    )
    return variance, phi1


def wp_phase_closed(model: FringeModel) -> float:
    """Working-point phase in [0, pi] from the stationarity condition.

    With ``c = cos(phi)`` the count variance is quadratic in ``c`` and the
    single-setting variance is that quadratic over ``1 - c^2``; its minimum
    solves ``a1 c^2 + 2 (a0 + a2) c + a1 = 0``. The root inside [-1, 1] is
    written in terms of the variance at the dark and bright fringe so that
    ``1 - c`` is never formed by subtraction.
    """
    _require_contrast(model)
    dark = detected_variance(model, 0.0)
    bright = detected_variance(model, math.pi)
    half_sum = 0.5 * (dark + bright)
    root = math.sqrt(dark * bright)
    one_minus_c = (dark + root) / (half_sum + root)
    return 2.0 * math.asin(min(1.0, math.sqrt(0.5 * one_minus_c)))


def balanced_wp(n_min: float, plan) -> float:
    """Working-point variance of a noiseless NLI limited by its weaker squeezer."""
    plan = _as_plan(plan)
    n_min = check_nonnegative(n_min, "n_min")
    if n_min == 0.0:
        raise DegenerateConfigurationError("n_min must be > 0")
    return 1.0 / (4.0 * plan.steps * n_min * (n_min + 1.0))


def uncertainty_report(model: FringeModel, plan) -> UncertaintyReport:
    plan = _as_plan(plan)
    _require_contrast(model)
    wp, phi1 = wp_uncertainty_closed(model, plan)
    distillation = scanning = residual = None
    if plan.steps >= 3:
        distillation = distillation_uncertainty(model, plan)
        scanning = scan_uncertainty(model, plan)
        residual = distillation_residual(model, plan, grid=90) if plan.steps < 5 else 0.0
    return UncertaintyReport(
        intrinsic=intrinsic_uncertainty(model),
        distillation=distillation,
        scanning=scanning,
        working_point=wp,
        wp_phase=wp_phase_closed(model),
        phi1=phi1,
        distillation_residual=residual,
    )
