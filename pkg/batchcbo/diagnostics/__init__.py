from batchcbo.diagnostics.ergodicity import *
from batchcbo.diagnostics.rates import *
from batchcbo.core.transitions import TransitionRecord

__all__ = [
    "TransitionRecord",
    "BoundReport",
    "DiagnosticsSummary",
    "PropertySuiteReport",
    "ergodicity_coefficient",
    "mixed_norm_1_inf",
    "ordered_product",
    "diameter_contraction_check",
    "product_alpha_lower_bound_noise_free",
    "noise_statistic_H",
    "perturbed_product_alpha_bound",
    "window_diameter_bound_check",
    "verify_trajectory",
    "matrix_property_suite",
    "RateReport",
    "lambda0_limit",
    "lambda0_path",
    "lambda1",
    "lambda2_sup",
    "positivity_condition",
    "critical_zeta",
    "homogeneous_rate",
    "homogeneous_condition",
    "theoretical_rates",
]
