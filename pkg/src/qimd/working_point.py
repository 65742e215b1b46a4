"""Numerical working-point search, ratio maps and the shot-noise boundary."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import brentq

from ._validation import check_count, check_nonnegative
from .analytics import ScanPlan, distillation_uncertainty, wp_uncertainty_closed
from .exceptions import DegenerateConfigurationError
from .fringe import MZI, NLI, FringeModel, NoiseChannel, PhotonStatistics, derive_fringe, detected_variance

__all__ = [
    "EDGE",
    "WorkingPointResult",
    "SweepGrid",
    "BoundaryResult",
    "golden_section",
    "phase_objective",
    "boundary_limits",
    "minimize_phase_uncertainty",
    "sweep_model",
    "ratio_map",
    "shot_noise_boundary",
]

EDGE = 1e-9
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_COARSE = 64


@dataclass(frozen=True)
class WorkingPointResult:
    phase: float
    variance: float
    at_boundary: bool
    iterations: int


@dataclass(frozen=True)
class SweepGrid:
    """Axes of an (eta, n0) ratio map with noise tied to loss, ``n_n = (1 - eta) n0``."""

    eta_axis: tuple
    n0_axis: tuple
    noise_stats: PhotonStatistics = PhotonStatistics.THERMAL

    def __post_init__(self):
        eta = tuple(float(x) for x in self.eta_axis)
        n0 = tuple(float(x) for x in self.n0_axis)
        if any(not 0.0 < x <= 1.0 for x in eta):
            raise ValueError("eta axis must lie in (0, 1]")
        if any(not (0.0 < x < math.inf) for x in n0):
            raise ValueError("n0 axis must lie in (0, inf)")
        for name, axis in (("eta", eta), ("n0", n0)):
            if any(b <= a for a, b in zip(axis, axis[1:])):
                raise ValueError(f"{name} axis must be strictly increasing")
        object.__setattr__(self, "eta_axis", eta)
        object.__setattr__(self, "n0_axis", n0)
        object.__setattr__(self, "noise_stats", PhotonStatistics.parse(self.noise_stats))


@dataclass(frozen=True)
class BoundaryResult:
    n0: float
    eta: float | None
    residual: float | None = None

    @property
    def found(self) -> bool:
        return self.eta is not None


def golden_section(f, a, b, tol=1e-10, max_iter=200):
    """Minimise a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x), evaluations)``; the bracket shrinks until it is no
    wider than ``tol``.
    """
    a, b = min(a, b), max(a, b)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    while b - a > tol and evals < max_iter:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
        evals += 1
    x, fx = (c, fc) if fc < fd else (d, fd)
    return float(x), float(fx), evals


def phase_objective(model: FringeModel, steps: int = 1):
    """Single-setting phase variance over ``steps`` repeats as a function of phi."""
    scale = steps * (model.amplitude * model.contrast) ** 2

    def f(phi):
        return detected_variance(model, phi) / (scale * math.sin(phi) ** 2)

    return f


def boundary_limits(model: FringeModel, steps: int = 1) -> tuple[float, float]:
    """Limits of the single-setting variance as phi -> 0+ and phi -> pi-.

    The variance is ``Var N / (M (A C sin phi)^2)``. At phi = pi the count
    variance is at least ``2A > 0``, so that limit always diverges. At phi = 0
    the numerator vanishes only for a noiseless, fully modulated fringe,
    where ``n_phi ~ A phi^2 / 2`` dominates and the limit is ``1 / (2 A M)``.
    """
    if model.contrast == 0.0:
        raise DegenerateConfigurationError("contrast is zero")
    if detected_variance(model, 0.0) == 0.0:
        zero = 1.0 / (2.0 * model.amplitude * steps)
    else:
        zero = math.inf
    return zero, math.inf


def minimize_phase_uncertainty(model: FringeModel, steps: int = 1, tol: float = 1e-10) -> WorkingPointResult:
    """Locate the working point by coarse scan plus golden-section refinement.

    The search runs on ``[EDGE, pi - EDGE]``. If an endpoint limit is finite
    and no larger than the interior optimum, the infimum lies on the boundary
    and is reported with its analytic value.
    """
    steps = check_count(steps, "steps", minimum=1)
    if model.contrast == 0.0:
        raise DegenerateConfigurationError("contrast is zero")
    if not all(math.isfinite(v) for v in (model.amplitude, model.noise_mean)):
        raise ValueError("model parameters must be finite")
    f = phase_objective(model, steps)

    grid = np.linspace(EDGE, math.pi - EDGE, _COARSE)
    values = np.array([f(p) for p in grid])
    k = int(np.argmin(values))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, _COARSE - 1)]
    phase, variance, evals = golden_section(f, lo, hi, tol=tol)
    evals += _COARSE

    zero, pi_limit = boundary_limits(model, steps)
    if zero <= variance * (1.0 + 1e-9):
        return WorkingPointResult(phase=0.0, variance=zero, at_boundary=True, iterations=evals)
    if pi_limit <= variance * (1.0 + 1e-9):
        return WorkingPointResult(phase=math.pi, variance=pi_limit, at_boundary=True, iterations=evals)
    return WorkingPointResult(phase=phase, variance=variance, at_boundary=False, iterations=evals)


def sweep_model(kind: str, eta: float, n0: float, noise_stats=PhotonStatistics.THERMAL) -> FringeModel:
    """Perfect-contrast model with noise fixed by ``n_n = (1 - eta) n0``.

    The noise source carries ``n0`` photons so that the beam splitter passes
    exactly ``(1 - eta) n0`` of them.
    """
    kind = kind.upper()
    if kind == "MZI":
        spec = MZI(n0=n0, T1=0.5, T2=0.5)
    elif kind == "NLI":
        spec = NLI(n0=n0, n0p=n0)
    else:
        raise ValueError(f"kind must be MZI or NLI, got {kind!r}")
    return derive_fringe(spec, NoiseChannel(eta=eta, mean_noise=n0, stats=noise_stats))


def _ratio_cell(kind, eta, n0, noise_stats, steps):
    model = sweep_model(kind, eta, n0, noise_stats)
    plan = ScanPlan(steps)
    wp, _ = wp_uncertainty_closed(model, plan)
    dn = distillation_uncertainty(model, plan)
    return wp, dn


def ratio_map(grid: SweepGrid, kind: str, steps: int = 8, n_jobs: int = 1):
    """Working-point to distillation variance ratio on an (eta, n0) grid.

    Returns
    -------
    dict
        ``wp``, ``distillation`` and ``ratio`` arrays of shape
        ``(len(eta_axis), len(n0_axis))``.
    """
    steps = check_count(steps, "steps", minimum=3)
    cells = [(e, n) for e in grid.eta_axis for n in grid.n0_axis]
    results = Parallel(n_jobs=n_jobs)(
        delayed(_ratio_cell)(kind, e, n, grid.noise_stats, steps) for e, n in cells
    )
    shape = (len(grid.eta_axis), len(grid.n0_axis))
    wp = np.array([r[0] for r in results], dtype=float).reshape(shape)
    dn = np.array([r[1] for r in results], dtype=float).reshape(shape)
    return {"wp": wp, "distillation": dn, "ratio": wp / dn}


def shot_noise_boundary(
    n0: float,
    steps: int = 1,
    noise_stats=PhotonStatistics.THERMAL,
    xtol: float = 1e-14,
) -> BoundaryResult:
    """Loss ``eta*`` at which a balanced NLI's working-point variance equals ``1/n0``.

    Scans ``eta`` in (0, 1] for the first sign change of
    ``n0 * var_WP(eta) - 1`` and refines it with Brent's method. Asymptotically
    ``eta* -> 1 / (1 + steps)`` as ``n0`` grows.
    """
    n0 = check_nonnegative(n0, "n0")
    steps = check_count(steps, "steps", minimum=1)
    if n0 == 0.0:
        return BoundaryResult(n0=n0, eta=None)
    plan = ScanPlan(steps)

    def g(eta):
        model = sweep_model("NLI", eta, n0, noise_stats)
        return wp_uncertainty_closed(model, plan)[0] * n0 - 1.0

    etas = np.concatenate([np.geomspace(1e-9, 1e-2, 8, endpoint=False), np.linspace(1e-2, 1.0, 100)])
    values = np.array([g(e) for e in etas])
    flips = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0)[0]
    if flips.size == 0:
        return BoundaryResult(n0=n0, eta=None)
    i = int(flips[0])
    if values[i] == 0.0:
        return BoundaryResult(n0=n0, eta=float(etas[i]), residual=0.0)
    root = brentq(g, etas[i], etas[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)
    return BoundaryResult(n0=n0, eta=float(root), residual=float(g(root)))
