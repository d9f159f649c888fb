"""
Inference Module - target potentials, gradient estimators and the optimization schemes
"""

__version__ = "1.0.0"

from .targets import (
    GaussianTarget,
    LogRegData,
    LogRegTarget,
    StudentTTarget,
    Target,
    check_derivatives,
    gaussian_target,
    generate_logreg_data,
    logreg_target,
    random_gaussian_target,
    random_student_t_target,
    student_t_target,
)
from .estimators import (
    CPolicy,
    CVariant,
    GradientEstimate,
    mc_estimate,
    resolve_c,
    vr_c_upper_bound,
    vr_estimate,
)
from .optimizers import (
    Algorithm,
    IterRecord,
    RunConfig,
    Trace,
    backward_step,
    bwgd_step,
    fb_step,
    run,
)

__all__ = [
    "GaussianTarget",
    "LogRegData",
    "LogRegTarget",
    "StudentTTarget",
    "Target",
    "check_derivatives",
    "gaussian_target",
    "generate_logreg_data",
    "logreg_target",
    "random_gaussian_target",
    "random_student_t_target",
    "student_t_target",
    "CPolicy",
    "CVariant",
    "GradientEstimate",
    "mc_estimate",
    "resolve_c",
    "vr_c_upper_bound",
    "vr_estimate",
    "Algorithm",
    "IterRecord",
    "RunConfig",
    "Trace",
    "backward_step",
    "bwgd_step",
    "fb_step",
    "run",
]
