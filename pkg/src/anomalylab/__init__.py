"""Regularized trace functionals of dressed spectral projectors in 1+1 dimensions.

The package evaluates damped traces of products of momentum projectors and
Gaussian multiplication operators with three independent backends (periodic
lattice, Fourier-reduced quadrature, direct double integral) and compares
them with closed forms expressed through I = integral A C' dx.
"""
from .continuum import EvalResult, eval_functional_direct2d, eval_functional_fourier
from .errors import (
    AccuracyError,
    AnomalyLabError,
    DegenerateFitError,
    InvalidParameterError,
    RegulatorTooSmallError,
)
from .functionals import (
    ConvergenceReport,
    EpsilonSchedule,
    Extrapolation,
    evaluate,
    evaluate_many,
    extrapolate,
    make_schedule,
    sweep,
)
from .lattice import LatticeConfig, build_lattice, damped_trace
from .oracles import J, OracleSet, appendix_terms, oracle_value, schwinger_term
from .profiles import GaussianTerm, ProfilePair, build_profile, reference_pair, schwinger_integral

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "AnomalyLabError", "ConvergenceReport", "DegenerateFitError", "EpsilonSchedule",
    "EvalResult", "Extrapolation", "GaussianTerm", "InvalidParameterError", "J", "LatticeConfig",
    "OracleSet", "ProfilePair", "RegulatorTooSmallError", "appendix_terms", "build_lattice",
    "build_profile", "damped_trace", "eval_functional_direct2d", "eval_functional_fourier",
    "evaluate", "evaluate_many", "extrapolate", "make_schedule", "oracle_value", "reference_pair",
    "schwinger_integral", "schwinger_term", "sweep",
]
