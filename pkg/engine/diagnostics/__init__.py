"""
Diagnostics Module - estimator variance, convergence bounds and the Laplace baseline
"""

__version__ = "1.0.0"

from .variance import (
    EstimatorCloud,
    VarianceCurve,
    VarianceReport,
    c_star,
    estimator_cloud,
    objective_f,
    optimality_residuals,
    stein_identity_residual,
    tau_estimate,
    variance_curve,
    variance_gap_empirical,
)
from .theory import (
    BoundInputs,
    bound_convex,
    bound_convex_sgvi,
    bound_strongly_convex,
    bound_strongly_convex_sgvi,
    covariance_floor_ok,
    reduction_region_check,
    large_variance_check,
)
from .laplace import laplace_approx

__all__ = [
    "EstimatorCloud",
    "VarianceCurve",
    "VarianceReport",
    "c_star",
    "estimator_cloud",
    "objective_f",
    "optimality_residuals",
    "stein_identity_residual",
    "tau_estimate",
    "variance_curve",
    "variance_gap_empirical",
    "BoundInputs",
    "bound_convex",
    "bound_convex_sgvi",
    "bound_strongly_convex",
    "bound_strongly_convex_sgvi",
    "covariance_floor_ok",
    "reduction_region_check",
    "large_variance_check",
    "laplace_approx",
]
