from hdgwave.analysis.stability import build_amplification_matrix, spectral_radius, power_iteration
from hdgwave.analysis.bessel import bessel_j, bessel_j_derivative, bessel_zero
from hdgwave.analysis.truncation import truncation_ratio_experiment
from hdgwave.analysis.solutions import StandingWave1D, DiskMode
from hdgwave.analysis.convergence import convergence_study, fit_rate, long_time_error_track

__all__ = [
    "build_amplification_matrix",
    "spectral_radius",
    "power_iteration",
    "bessel_j",
    "bessel_j_derivative",
    "bessel_zero",
    "truncation_ratio_experiment",
    "StandingWave1D",
    "DiskMode",
    "convergence_study",
    "fit_rate",
    "long_time_error_track",
]
