"""Literal special-case formulas for three regimes, and their general counterparts.

The literal expressions are written out independently of
:mod:`qimd.analytics` so the two can be compared term by term.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

from .analytics import ScanPlan, distillation_uncertainty, intrinsic_uncertainty, wp_uncertainty_closed
from .fringe import MZI, NLI, InterferometerSpec, NoiseChannel, PhotonStatistics, derive_fringe

__all__ = ["Regime", "TableValues", "SpontaneousRegimeWarning", "table_formula", "general_formula", "table_comparisons"]

SPONTANEOUS_MAX_N0 = 0.01


class SpontaneousRegimeWarning(UserWarning):
    pass


class Regime(enum.Enum):
    NO_NOISE = "no_noise"
    PERFECT_CONTRAST = "perfect_contrast"
    SPONTANEOUS = "spontaneous"


@dataclass(frozen=True)
class TableValues:
    distillation: float | None
    working_point: float
    intrinsic: float | None = None


def _balanced(spec) -> bool:
    if isinstance(spec, MZI):
        return spec.T1 == 0.5 and spec.T2 == 0.5
    return spec.n0 == spec.n0p


def _check(spec: InterferometerSpec, regime: Regime, plan: ScanPlan, noise: NoiseChannel):
    if regime is Regime.NO_NOISE:
        if noise.eta != 1.0:
            raise ValueError("no-noise table assumes eta = 1")
        return
    if not _balanced(spec):
        raise ValueError(f"{regime.value} table requires a balanced {type(spec).__name__}")
    if regime is Regime.SPONTANEOUS:
        if not math.isclose(noise.mean_noise, spec.n0, rel_tol=1e-12, abs_tol=0.0):
            raise ValueError("spontaneous table assumes noise with n0 photons, n_n = (1 - eta) n0")
        if spec.n0 > SPONTANEOUS_MAX_N0:
            warnings.warn(
                f"n0 = {spec.n0} is outside the spontaneous regime (n0 <= {SPONTANEOUS_MAX_N0})",
                SpontaneousRegimeWarning,
                stacklevel=3,
            )
        if noise.eta == 0.0:
            raise ValueError("spontaneous table needs eta > 0")


def _no_noise(spec, m):
    if isinstance(spec, MZI):
        gamma_n0 = spec.gamma * spec.n0
        c2 = 4.0 * spec.T1 * spec.T2 * (1.0 - spec.T1) * (1.0 - spec.T2) / spec.gamma**2
        dn = 2.0 / (m * c2 * gamma_n0) if m >= 3 else None
        wp = 1.0 / (2.0 * m * gamma_n0 * (1.0 - math.sqrt(max(1.0 - c2, 0.0))))
        return TableValues(distillation=dn, working_point=wp)
    n0, n0p = spec.n0, spec.n0p
    a = n0 + n0p + 2.0 * n0 * n0p
    c2 = 4.0 * n0 * n0p * (n0 + 1.0) * (n0p + 1.0) / a**2
    dn = 2.0 / (m * c2 * a) + (2.0 + c2 / 2.0) / (m * c2) if m >= 3 else None
    root = math.sqrt(max((1.0 - c2) * (((1.0 + a) / a) ** 2 - c2), 0.0))
    wp = (1.0 / (2.0 * m * c2)) * (1.0 / a + (1.0 - c2) + root)
    return TableValues(distillation=dn, working_point=wp)


def _perfect_contrast(spec, m, noise):
    eta = noise.eta
    n0 = spec.n0
    nn = noise.detected_noise
    w = nn * (1.0 + noise.stats.lam * nn)
    if isinstance(spec, MZI):
        en = eta * n0
        d0 = (1.0 / en) * (1.0 + 2.0 * nn + 2.0 * w / en)
        dn = 4.0 * d0 / m if m >= 3 else None
        wp = d0 / m + 2.0 * math.sqrt(w) / (m * en**2) * math.sqrt(w + en * (1.0 + 2.0 * nn))
        return TableValues(distillation=dn, working_point=wp, intrinsic=d0)
    b = eta * n0 * (n0 + 1.0)
    d0 = 1.0 / (4.0 * b) * (1.0 + 2.0 * nn + w / (2.0 * b))
    dn = 4.0 * d0 / m + 5.0 / (2.0 * m) if m >= 3 else None
    wp = d0 / m + math.sqrt(w) / (8.0 * m * b**2) * math.sqrt(w + 4.0 * b * (1.0 + 2.0 * nn + 4.0 * b))
    return TableValues(distillation=dn, working_point=wp, intrinsic=d0)


def _spontaneous(spec, m, noise):
    eta = noise.eta
    n0 = spec.n0
    denom = m * eta**2 * n0
    if isinstance(spec, MZI):
        dn = 4.0 * (2.0 - eta) / denom if m >= 3 else None
        wp = (2.0 + 2.0 * math.sqrt(1.0 - eta) - eta) / denom
    else:
        dn = (1.0 + eta) / (2.0 * denom) if m >= 3 else None
        wp = (1.0 + eta + math.sqrt((1.0 - eta) * (1.0 + 3.0 * eta))) / (8.0 * denom)
    return TableValues(distillation=dn, working_point=wp)


def table_formula(spec: InterferometerSpec, regime, plan, noise: NoiseChannel | None = None) -> TableValues:
    """Evaluate the tabulated closed forms for ``regime`` literally.

    With fewer than three steps only the working-point entries exist and
    ``distillation`` is ``None``.

    Raises
    ------
    ValueError
        If the configuration does not satisfy the regime's assumptions.
    """
    regime = Regime(regime)
    plan = plan if isinstance(plan, ScanPlan) else ScanPlan(int(plan))
    noise = NoiseChannel() if noise is None else noise
    _check(spec, regime, plan, noise)
    m = plan.steps
    if regime is Regime.NO_NOISE:
        return _no_noise(spec, m)
    if regime is Regime.PERFECT_CONTRAST:
        return _perfect_contrast(spec, m, noise)
    return _spontaneous(spec, m, noise)


def general_formula(spec: InterferometerSpec, plan, noise: NoiseChannel | None = None) -> TableValues:
    """The same quantities from the general fringe-model expressions."""
    plan = plan if isinstance(plan, ScanPlan) else ScanPlan(int(plan))
    model = derive_fringe(spec, noise)
    wp, _ = wp_uncertainty_closed(model, plan)
    return TableValues(
        distillation=distillation_uncertainty(model, plan) if plan.steps >= 3 else None,
        working_point=wp,
        intrinsic=intrinsic_uncertainty(model),
    )


def _relative(a, b):
    return abs(a - b) / abs(b)


def table_comparisons(steps: int = 8):
    """Built-in comparison matrix used by the ``tables`` subcommand.

    Yields dict rows with the table value, the general value and their
    relative difference. Spontaneous-regime rows are asymptotic and carry
    the ratio instead of an exact match.
    """
    rows = []
    plan = ScanPlan(steps)
    quantities = ("distillation", "working_point", "intrinsic")

    def emit(table, regime, spec, noise, literal, general, asymptotic=False):
        for q in quantities:
            lit = getattr(literal, q)
            gen = getattr(general, q)
            if lit is None:
                continue
            rows.append(
                {
                    "table": table,
                    "regime": regime.value,
                    "kind": type(spec).__name__,
                    "quantity": q,
                    "n0": spec.n0,
                    "second": spec.n0p if isinstance(spec, NLI) else spec.T2,
                    "eta": noise.eta,
                    "lambda_n": noise.stats.lam,
                    "steps": plan.steps,
                    "table_value": lit,
                    "general_value": gen,
                    "rel_diff": _relative(lit, gen),
                    "ratio": lit / gen,
                    "asymptotic": asymptotic,
                }
            )

    clean = NoiseChannel()
    for t1, t2 in [(0.5, 0.5), (0.3, 0.6), (0.45, 0.8), (0.2, 0.9)]:
        for n0 in (1.0, 37.0, 1e3):
            spec = MZI(n0=n0, T1=t1, T2=t2)
            emit(1, Regime.NO_NOISE, spec, clean, table_formula(spec, Regime.NO_NOISE, plan, clean),
                 general_formula(spec, plan, clean))
    for n0, n0p in [(1.0, 1.0), (1.0, 2.0), (0.3, 5.0), (12.0, 4.0)]:
        spec = NLI(n0=n0, n0p=n0p)
        emit(1, Regime.NO_NOISE, spec, clean, table_formula(spec, Regime.NO_NOISE, plan, clean),
             general_formula(spec, plan, clean))
    for stats in PhotonStatistics:
        for eta in (0.3, 0.8, 1.0):
            for n0 in (2.0, 50.0):
                noise = NoiseChannel(eta=eta, mean_noise=3.0, stats=stats)
                for spec in (MZI(n0=n0), NLI(n0=n0, n0p=n0)):
                    emit(2, Regime.PERFECT_CONTRAST, spec, noise,
                         table_formula(spec, Regime.PERFECT_CONTRAST, plan, noise),
                         general_formula(spec, plan, noise))
    for n0 in (1e-2, 1e-3, 1e-4):
        for eta in (0.7, 1.0):
            noise = NoiseChannel(eta=eta, mean_noise=n0, stats=PhotonStatistics.THERMAL)
            for spec in (MZI(n0=n0), NLI(n0=n0, n0p=n0)):
                emit(3, Regime.SPONTANEOUS, spec, noise,
                     table_formula(spec, Regime.SPONTANEOUS, plan, noise),
                     general_formula(spec, plan, noise), asymptotic=True)
    return rows
