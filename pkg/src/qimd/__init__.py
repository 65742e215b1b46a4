"""Phase uncertainty of noisy interferometers.

Reduces Mach-Zehnder and SU(1,1) interferometers with admixed incoherent
noise to a common fringe model, evaluates the phase variance of the
multi-setting distillation estimator and of single-setting operation at the
optimal working point, and checks both against seeded photon-counting
simulations.
"""

__version__ = "0.1.0"

from .analytics import (
    PIEZO_JITTER,
    SLM_JITTER,
    ScanPlan,
    UncertaintyReport,
    balanced_wp,
    distill_phase,
    distillation_uncertainty,
    distillation_uncertainty_sum,
    intrinsic_uncertainty,
    scan_uncertainty,
    single_point_uncertainty,
    uncertainty_report,
    wp_phase_closed,
    wp_uncertainty_closed,
)
from .estimators import FringeInverter, PhaseDistiller
from .exceptions import (
    ConsistencyError,
    DegenerateConfigurationError,
    NoFringeInformationError,
    QimdError,
    RegimeViolationError,
    StationaryPointError,
)
from .fringe import (
    MZI,
    NLI,
    FringeModel,
    NoiseChannel,
    PhotonStatistics,
    derive_fringe,
    detected_variance,
    fringe_mean,
)
from .working_point import minimize_phase_uncertainty, ratio_map, shot_noise_boundary

__all__ = [
    "__version__",
    "PIEZO_JITTER",
    "SLM_JITTER",
    "ScanPlan",
    "UncertaintyReport",
    "balanced_wp",
    "distill_phase",
    "distillation_uncertainty",
    "distillation_uncertainty_sum",
    "intrinsic_uncertainty",
    "scan_uncertainty",
    "single_point_uncertainty",
    "uncertainty_report",
    "wp_phase_closed",
    "wp_uncertainty_closed",
    "FringeInverter",
    "PhaseDistiller",
    "ConsistencyError",
    "DegenerateConfigurationError",
    "NoFringeInformationError",
    "QimdError",
    "RegimeViolationError",
    "StationaryPointError",
    "MZI",
    "NLI",
    "FringeModel",
    "NoiseChannel",
    "PhotonStatistics",
    "derive_fringe",
    "detected_variance",
    "fringe_mean",
    "minimize_phase_uncertainty",
    "ratio_map",
    "shot_noise_boundary",
]
