"""Exact photon-counting simulation used to check the analytic layer."""

from .fock import PHOTON_CAP, FockDistribution, bs_output_distribution, bs_output_exact
from .montecarlo import (
    EmpiricalEstimate,
    MCResult,
    MeasurementRecord,
    appendix_variance,
    mc_distillation,
    mc_working_point,
    simulate_detected_counts,
    simulate_model_counts,
)
from .sampling import SAMPLERS, sample_detected, sample_photon_number

__all__ = [
    "PHOTON_CAP",
    "FockDistribution",
    "bs_output_distribution",
    "bs_output_exact",
    "EmpiricalEstimate",
    "MCResult",
    "MeasurementRecord",
    "appendix_variance",
    "mc_distillation",
    "mc_working_point",
    "simulate_detected_counts",
    "simulate_model_counts",
    "SAMPLERS",
    "sample_detected",
    "sample_photon_number",
]
