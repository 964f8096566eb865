"""Sampling recovery and quadrature for Freud-weighted Sobolev functions.

Equidistant B-spline quasi-interpolation (``Q``) and blended interpolation
(``P``) on ``[-rho a_m, rho a_m]``, the quadratures they generate, weighted
norms, spline-space inequality ratios and tensor-product versions.
"""

from .analysis import (IntegrationError, IntegrationSpec, recovery_error,
                       reference_weighted_integral, weighted_lq_norm, weighted_sobolev_norm)
from .bench import ExperimentConfig, RateReport, emit_report, fit_rate, n_to_m, run_convergence
from .blend import (apply_P_bar, apply_P_truncated, apply_R_truncated, apply_RQ_truncated,
                    blended_stencil)
from .bspline import bspline_derivative, bspline_eval, lagrange_extension
from .corpus import CorpusFunction, get_corpus, witness
from .estimators import (BlendedInterpolant, QuasiInterpolant, TensorInterpolant,
                         WeightedQuadrature)
from .quadrature import WeightedQuadratureRule, build_rule_P, build_rule_Q, export_rule, integrate
from .quasi import (QuasiCoefficients, RecoveryConfig, SamplingError, apply_Q_bar,
                    apply_Q_truncated, lambda_catalog, make_config, validate_coefficients)
from .spline import SplineFunction
from .spline_space import (bernstein_ratio, fooling_spline, make_spline, marcinkiewicz_ratios,
                           nikolskii_ratio)
from .tensor import apply_Pd_truncated, apply_Qd_truncated, integrate_d
from .weight import FreudWeight, RecoveryGrid, build_grid, mrs_number, rate_exponent, select_rho

__version__ = "0.1.0"

__all__ = [
    "BlendedInterpolant", "CorpusFunction", "ExperimentConfig", "FreudWeight", "IntegrationError",
    "IntegrationSpec", "QuasiCoefficients", "QuasiInterpolant", "RateReport", "RecoveryConfig",
    "RecoveryGrid", "SamplingError", "SplineFunction", "TensorInterpolant", "WeightedQuadrature",
    "WeightedQuadratureRule", "apply_P_bar", "apply_P_truncated", "apply_Pd_truncated",
    "apply_Q_bar", "apply_Q_truncated", "apply_Qd_truncated", "apply_RQ_truncated",
    "apply_R_truncated", "bernstein_ratio", "blended_stencil", "bspline_derivative", "bspline_eval",
    "build_grid", "build_rule_P", "build_rule_Q", "emit_report", "export_rule", "fit_rate",
    "fooling_spline", "get_corpus", "integrate", "integrate_d", "lagrange_extension",
    "lambda_catalog", "make_config", "make_spline", "marcinkiewicz_ratios", "mrs_number", "n_to_m",
    "nikolskii_ratio", "rate_exponent", "recovery_error", "reference_weighted_integral",
    "run_convergence", "select_rho", "validate_coefficients", "weighted_lq_norm",
    "weighted_sobolev_norm", "witness",
]
