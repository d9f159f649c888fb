"""
Convergence bound calculators and region checks for the control-variate scheme
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Tuple

import numpy as np

from geometry.exceptions import DimensionMismatch, PreconditionViolated
from geometry.gaussian import Gaussian, w2_squared
from geometry.linalg import min_eigenvalue

logger = logging.getLogger(__name__)


@dataclass
class BoundInputs:
    """
    Constants entering the convergence bounds

    tau_max_inf and tau_max_E are the worst-case and averaged variance-reduction factors;
    tau = 1 recovers plain stochastic gradients.
    """
    alpha: float
    beta: float
    eta: float
    N: int
    d: int
    tau_max_inf: float
    tau_max_E: float
    w2sq_init: float
    lambda_max_opt: float

    def __post_init__(self):
        values = [self.alpha, self.beta, self.eta, self.tau_max_inf, self.tau_max_E,
                  self.w2sq_init, self.lambda_max_opt]
        if not all(math.isfinite(v) for v in values):
            raise ValueError("Bound inputs must be finite")
        if self.alpha < 0 or self.beta <= 0 or self.eta <= 0 or self.lambda_max_opt <= 0:
            raise ValueError("Need alpha >= 0 and beta, eta, lambda_max_opt > 0")
        if self.N < 0 or self.d < 1 or self.w2sq_init < 0:
            raise ValueError("Need N >= 0, d >= 1 and w2sq_init >= 0")
        for tau in (self.tau_max_inf, self.tau_max_E):
            if not 0.0 <= tau <= 1.0:
                raise ValueError(f"Variance-reduction factors lie in [0, 1], got {tau}")

    @property
    def smoothness_constant(self) -> float:
        """C = 24 beta^3 lambda_max of the optimal covariance"""
        return 24.0 * self.beta ** 3 * self.lambda_max_opt

    def to_dict(self) -> dict:
        return asdict(self)


def _require_convex_range(bounds: BoundInputs):
    if bounds.eta > 1.0 / (2.0 * bounds.beta):
        raise PreconditionViolated(f"Step size {bounds.eta} exceeds 1/(2 beta) = {1.0 / (2.0 * bounds.beta)}")
    if bounds.N < 1:
        raise PreconditionViolated("The convex bound needs N >= 1")


def _require_strong_range(bounds: BoundInputs):
    if bounds.alpha <= 0:
        raise PreconditionViolated("The strongly convex bound needs alpha > 0")
    limit = bounds.alpha ** 2 / (48.0 * bounds.beta ** 3)
    if bounds.eta > limit:
        raise PreconditionViolated(f"Step size {bounds.eta} exceeds alpha^2/(48 beta^3) = {limit:.3e}")


def bound_convex(bounds: BoundInputs) -> float:
    """
    Convex-case bound on the expected objective gap after N steps

    e / (1 + C eta^2 (1 - tau_inf) / 2) * (1/(2 eta N) + C eta / 2) * W0^2 + 3 eta beta d (1 + tau_E)
    """
    _require_convex_range(bounds)
    C = bounds.smoothness_constant
    eta = bounds.eta
    contraction = math.e / (1.0 + C * eta ** 2 * (1.0 - bounds.tau_max_inf) / 2.0)
    bias = contraction * (1.0 / (2.0 * eta * bounds.N) + C * eta / 2.0) * bounds.w2sq_init
    noise = 3.0 * eta * bounds.beta * bounds.d * (1.0 + bounds.tau_max_E)
    return bias + noise


def bound_strongly_convex(bounds: BoundInputs) -> float:
    """
    Strongly convex bound on E W2^2(mu_N, optimum)

    exp(-N (3 - tau_inf) eta alpha / 4) W0^2 + 24 (1 + tau_E) beta eta d / ((3 - tau_inf) alpha)
    """
    _require_strong_range(bounds)
    rate = bounds.N * (3.0 - bounds.tau_max_inf) * bounds.eta * bounds.alpha / 4.0
    noise = (24.0 * (1.0 + bounds.tau_max_E) * bounds.beta * bounds.eta * bounds.d
             / ((3.0 - bounds.tau_max_inf) * bounds.alpha))
    return math.exp(-rate) * bounds.w2sq_init + noise


def bound_convex_sgvi(bounds: BoundInputs) -> float:
    """Plain stochastic-gradient convex bound: e W0^2/(2 N eta) + e C eta W0^2 / 2 + 6 beta eta d"""
    _require_convex_range(bounds)
    C = bounds.smoothness_constant
    w0 = bounds.w2sq_init
    return (math.e * w0 / (2.0 * bounds.N * bounds.eta)
            + math.e * C * bounds.eta * w0 / 2.0
            + 6.0 * bounds.beta * bounds.eta * bounds.d)


def bound_strongly_convex_sgvi(bounds: BoundInputs) -> float:
    """Plain stochastic-gradient strongly convex bound: exp(-alpha N eta / 2) W0^2 + 24 beta eta d / alpha"""
    _require_strong_range(bounds)
    return (math.exp(-bounds.alpha * bounds.N * bounds.eta / 2.0) * bounds.w2sq_init
            + 24.0 * bounds.beta * bounds.eta * bounds.d / bounds.alpha)


def reduction_region_check(
    g: Gaussian,
    opt: Gaussian,
    ell: float,
    c: float,
) -> Tuple[bool, float, float]:
    """
    Neighbourhood of the optimum where the control variate reduces variance

    lhs = 2 ell W2(g, opt) + c |Tr(Sigma^{-1}) - Tr(Sigma_opt^{-1})|, radius = (2 - c) Tr(Sigma_opt^{-1})

    Returns:
        Tuple of (inside, lhs, radius)
    """
    if g.dim != opt.dim:
        raise DimensionMismatch(f"Gaussians of dimension {g.dim} and {opt.dim}")
    if ell < 0:
        raise ValueError(f"Laplacian smoothness must be >= 0, got {ell}")
    if not 0.0 < c < 2.0:
        raise ValueError(f"Coefficient must lie in (0, 2), got {c}")
    opt_trace = opt.precision_trace
    lhs = 2.0 * ell * math.sqrt(w2_squared(g, opt)) + c * abs(g.precision_trace - opt_trace)
    radius = (2.0 - c) * opt_trace
    return lhs < radius, lhs, radius


def large_variance_check(g: Gaussian, alpha: float, c: float) -> bool:
    """Large-variance regime for alpha-strongly convex V: Tr(Sigma^{-1}) < 2 alpha d / c"""
    if alpha <= 0 or c <= 0:
        raise ValueError(f"Need alpha, c > 0, got alpha={alpha}, c={c}")
    return g.precision_trace < 2.0 * alpha * g.dim / c


def covariance_floor_ok(trace, beta: float, tol: float = 1e-9) -> bool:
    """True when every snapshot of the trace keeps lambda_min(Sigma_k) >= 1/beta - tol"""
    floor = 1.0 / beta - tol
    worst = min(min_eigenvalue(g.cov) for g in trace.iterates)
    if worst < floor:
        logger.debug(f"Covariance floor violated: {worst:.3e} < {floor:.3e}")
    return bool(np.isfinite(worst) and worst >= floor)
