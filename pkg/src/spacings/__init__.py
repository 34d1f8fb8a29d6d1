"""Exact and asymptotic law of the largest gap among n uniform points on a circle."""

__version__ = "0.1.0"

from .asymptotics import (
    centered_scaled_moments,
    convergence_table,
    euler_gamma,
    limit_cumulants,
    limit_moments,
    zeta_int,
)
from .exactdist import cdf, cdf_real, kth_gap_mean, moment_exact, pdf, quantile
from .harmonic import harmonic, script_h_sequence
from .montecarlo import simulate

__all__ = [
    "__version__",
    "cdf", "cdf_real", "pdf", "quantile", "moment_exact", "kth_gap_mean",
    "harmonic", "script_h_sequence",
    "euler_gamma", "zeta_int", "limit_moments", "limit_cumulants",
    "centered_scaled_moments", "convergence_table",
    "simulate",
]
