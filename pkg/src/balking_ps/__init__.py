"""Sojourn-time law of the M/M/1 processor-sharing queue with balking ``b_n = 1/(n+1)``.

The density ``p_n(t)`` of a tagged customer who finds ``n`` others is
available from a spectral series, from its Laplace transform, from the
integrated master equations, from asymptotic formulas and from simulation.
"""

from .errors import ConvergenceError, DomainError, TruncationError
from .spectral import (
    DensityResult,
    EigenPair,
    ModelParams,
    SpectralTerm,
    coefficient,
    completeness_sum,
    conditional_density,
    eigenfunction,
    eigenvalues,
    mean_sojourn,
    normalization_sum,
    second_moment,
    spectral_density,
    spectral_mean,
    spectral_second_moment,
    spectral_tail,
    spectral_term,
    t_switch,
    unconditional_density,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DomainError",
    "TruncationError",
    "DensityResult",
    "EigenPair",
    "ModelParams",
    "SpectralTerm",
    "coefficient",
    "completeness_sum",
    "conditional_density",
    "eigenfunction",
    "eigenvalues",
    "mean_sojourn",
    "normalization_sum",
    "second_moment",
    "spectral_density",
    "spectral_mean",
    "spectral_second_moment",
    "spectral_tail",
    "spectral_term",
    "t_switch",
    "unconditional_density",
    "__version__",
]
