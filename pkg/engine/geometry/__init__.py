"""
Geometry Module - SPD linear algebra and the Bures-Wasserstein space of Gaussians
"""

__version__ = "1.0.0"

from .exceptions import (
    BWVIError,
    ConvergenceFailure,
    DegenerateVariance,
    DimensionMismatch,
    NoConvergence,
    NonPdHessianAtMode,
    NotPositiveDefinite,
    NotPositiveSemiDefinite,
    NotSymmetric,
    PreconditionViolated,
    SpecError,
    UnknownPreset,
)
from .linalg import (
    CholeskyFactor,
    chol_inverse,
    chol_solve,
    cholesky,
    factorization_count,
    logdet,
    spd_sqrt,
    sym_eigen,
    symmetrize,
)
from .rng import RngState, child_seed
from .gaussian import (
    Gaussian,
    bures_squared,
    entropy,
    kl_gaussian,
    ot_map,
    ot_map_linear,
    sample,
    stein_score,
    w2_squared,
)

__all__ = [
    "BWVIError",
    "ConvergenceFailure",
    "DegenerateVariance",
    "DimensionMismatch",
    "NoConvergence",
    "NonPdHessianAtMode",
    "NotPositiveDefinite",
    "NotPositiveSemiDefinite",
    "NotSymmetric",
    "PreconditionViolated",
    "SpecError",
    "UnknownPreset",
    "CholeskyFactor",
    "chol_inverse",
    "chol_solve",
    "cholesky",
    "factorization_count",
    "logdet",
    "spd_sqrt",
    "sym_eigen",
    "symmetrize",
    "RngState",
    "child_seed",
    "Gaussian",
    "bures_squared",
    "entropy",
    "kl_gaussian",
    "ot_map",
    "ot_map_linear",
    "sample",
    "stein_score",
    "w2_squared",
]
