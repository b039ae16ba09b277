"""Numerical experiments on triangular Schur multipliers and Cesaro-type operators."""

__version__ = "0.1.0"

from .kernels import KernelSpec, kernel_eval, kernel_l1_norm, phi_gamma_l1_norm, pointwise_bound_report
from .matrices import (
    FiniteSection,
    Structure,
    WeightSequence,
    build_structured,
    cesaro_operator_matrix,
    hadamard,
    iterated_limit_diagnostic,
    triangular_truncation,
    volterra_operator_matrix,
)
from .norms import NormBracket, NormEstimate, NormKind, lp_norm, norm_growth_curve, schur_norm_lower, spectral_norm
from .series import CoefficientSequence, blaschke_symbol, log_symbol, series_exp, series_multiply
from .spectral import power_norm_sequence, quasinilpotency_report, resolvent_section

__all__ = [
    "__version__",
    "CoefficientSequence",
    "FiniteSection",
    "KernelSpec",
    "NormBracket",
    "NormEstimate",
    "NormKind",
    "Structure",
    "WeightSequence",
    "blaschke_symbol",
    "build_structured",
    "cesaro_operator_matrix",
    "hadamard",
    "iterated_limit_diagnostic",
    "kernel_eval",
    "kernel_l1_norm",
    "log_symbol",
    "lp_norm",
    "norm_growth_curve",
    "phi_gamma_l1_norm",
    "pointwise_bound_report",
    "power_norm_sequence",
    "quasinilpotency_report",
    "resolvent_section",
    "schur_norm_lower",
    "series_exp",
    "series_multiply",
    "spectral_norm",
    "triangular_truncation",
    "volterra_operator_matrix",
]
