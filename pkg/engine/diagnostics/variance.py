"""
Empirical variance diagnostics for the gradient estimators
Variance gap, optimal coefficient, reduction factor, optimality and Stein residuals
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from geometry.exceptions import DegenerateVariance
from geometry.gaussian import Gaussian, entropy, sample, stein_score
from geometry.linalg import chol_inverse
from geometry.rng import RngState
from inference.targets import GaussianTarget, Target

logger = logging.getLogger(__name__)

MIN_VARIANCE_SAMPLES = 100


@dataclass
class VarianceReport:
    """Total variances of the Monte Carlo and control-variate estimators of E[grad V]"""
    var_mc: float
    var_vr: float
    gap_empirical: float
    gap_analytic: Optional[float]
    c_used: float
    c_star: float
    tau_hat: float
    n_samples: int
    standard_error: float

    def to_dict(self) -> dict:
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, float) and not math.isfinite(value):
                data[key] = None
        return data


def _check_dims(t: Target, g: Gaussian):
    if t.dim != g.dim:
        raise ValueError(f"Target dimension {t.dim} does not match Gaussian dimension {g.dim}")


def _mean_hessian_trace(t: Target, X: NDArray) -> float:
    if t.constant_hessian:
        return float(t.hessian_trace_batch(X[:1])[0])
    return float(np.mean(t.hessian_trace_batch(X)))


def _centered_sq_norms(values: NDArray) -> NDArray:
    centered = values - values.mean(axis=0)
    return np.sum(centered * centered, axis=1)


def variance_gap_empirical(
    t: Target,
    g: Gaussian,
    c: float,
    n: int,
    rng: RngState,
) -> VarianceReport:
    """
    Compare both single-draw estimators on common draws

    Variances are E||b - E b||^2 with the mean replaced by the sample mean. The analytic
    gap 2c Tr(E Hessian) - c^2 Tr(Sigma^{-1}) is filled in for constant-Hessian targets.

    Args:
        t: Target
        g: Gaussian the draws come from
        c: Control-variate coefficient
        n: Number of draws (>= 100)
        rng: Random stream

    Returns:
        VarianceReport
    """
    if n < MIN_VARIANCE_SAMPLES:
        raise ValueError(f"Need at least {MIN_VARIANCE_SAMPLES} draws, got {n}")
    _check_dims(t, g)

    X = sample(g, rng, n)
    grads = t.gradient_batch(X)
    controlled = grads - c * stein_score(g, X) if c != 0.0 else grads

    dev_mc = _centered_sq_norms(grads) * n / (n - 1)
    dev_vr = _centered_sq_norms(controlled) * n / (n - 1)
    var_mc = float(dev_mc.mean())
    var_vr = float(dev_vr.mean())
    gap = var_mc - var_vr
    standard_error = float(np.std(dev_mc - dev_vr, ddof=1) / math.sqrt(n))

    inv_trace = g.precision_trace
    hess_trace = _mean_hessian_trace(t, X)
    gap_analytic = None
    if t.constant_hessian:
        gap_analytic = 2.0 * c * hess_trace - c * c * inv_trace

    tau_hat = var_vr / var_mc if var_mc > 0 else float("nan")
    return VarianceReport(
        var_mc=var_mc,
        var_vr=var_vr,
        gap_empirical=gap,
        gap_analytic=gap_analytic,
        c_used=float(c),
        c_star=hess_trace / inv_trace,
        tau_hat=tau_hat,
        n_samples=n,
        standard_error=standard_error,
    )


def c_star(t: Target, g: Gaussian, n: int, rng: RngState) -> float:
    """Variance-minimizing coefficient Tr(E Hessian) / Tr(Sigma^{-1})"""
    if n < 1:
        raise ValueError(f"Sample count must be >= 1, got {n}")
    _check_dims(t, g)
    return _mean_hessian_trace(t, sample(g, rng, n)) / g.precision_trace


def tau_estimate(report: VarianceReport) -> float:
    """
    Variance-reduction factor of one iteration

    Uses 1 - gap_analytic / var_mc when the analytic gap is known, else var_vr / var_mc.

    Raises:
        DegenerateVariance: if var_mc <= 0
    """
    if not report.var_mc > 0:
        raise DegenerateVariance(f"Monte Carlo variance {report.var_mc} is not positive")
    if report.gap_analytic is not None:
        return 1.0 - report.gap_analytic / report.var_mc
    return report.var_vr / report.var_mc


def optimality_residuals(t: Target, g: Gaussian, n: int, rng: RngState) -> Tuple[float, float]:
    """
    First-order optimality residuals: ||E grad V|| and ||E Hessian V - Sigma^{-1}||_F

    Returns:
        Tuple of (gradient norm, Hessian residual)
    """
    if n < MIN_VARIANCE_SAMPLES:
        raise ValueError(f"Need at least {MIN_VARIANCE_SAMPLES} draws, got {n}")
    _check_dims(t, g)
    X = sample(g, rng, n)
    grad_norm = float(np.linalg.norm(t.gradient_batch(X).mean(axis=0)))
    if t.constant_hessian:
        mean_hess = t.hessian(X[0])
    else:
        mean_hess = t.hessian_batch(X).mean(axis=0)
    hess_residual = float(np.linalg.norm(mean_hess - chol_inverse(g.chol)))
    return grad_norm, hess_residual


def objective_f(t: Target, g: Gaussian, n: int, rng: RngState) -> float:
    """
    KL objective up to the normalizing constant: E_g[V] sampled, negative entropy exact
    """
    if n < 1:
        raise ValueError(f"Sample count must be >= 1, got {n}")
    _check_dims(t, g)
    X = sample(g, rng, n)
    return float(np.mean(t.potential_batch(X))) - entropy(g)


def stein_identity_residual(t: Target, g: Gaussian, n: int, rng: RngState) -> float:
    """
    Relative residual of E[grad V(X) (X - m)^T] = E[Hessian V] Sigma under g
    """
    if n < 1:
        raise ValueError(f"Sample count must be >= 1, got {n}")
    _check_dims(t, g)
    X = sample(g, rng, n)
    grads = t.gradient_batch(X)
    lhs = grads.T @ (X - g.mean) / n
    if t.constant_hessian:
        mean_hess = t.hessian(X[0])
    else:
        mean_hess = t.hessian_batch(X).mean(axis=0)
    rhs = mean_hess @ g.cov
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), 1e-12))


@dataclass
class EstimatorCloud:
    """Single-draw Monte Carlo and control-variate estimates of E[grad V] on common draws"""
    mc: NDArray
    vr: NDArray
    c: float
    exact: Optional[NDArray] = None

    def rows(self):
        """(estimator, index, coordinates...) rows for CSV output"""
        for name, values in (("mc", self.mc), ("vr", self.vr)):
            for i, point in enumerate(values):
                yield [name, i, *[float(v) for v in point]]


def estimator_cloud(t: Target, g: Gaussian, c: float, n: int, rng: RngState) -> EstimatorCloud:
    """n paired single-draw estimates of both estimators around the exact gradient"""
    if n < 1:
        raise ValueError(f"Sample count must be >= 1, got {n}")
    _check_dims(t, g)
    X = sample(g, rng, n)
    grads = t.gradient_batch(X)
    exact = None
    if isinstance(t, GaussianTarget):
        exact = t.precision @ (g.mean - t.distribution.mean)
    return EstimatorCloud(mc=grads, vr=grads - c * stein_score(g, X), c=float(c), exact=exact)


@dataclass
class VarianceCurve:
    """Empirical estimator variance over a grid of coefficients"""
    cs: NDArray
    variances: NDArray
    c_star: float

    @property
    def argmin(self) -> float:
        return float(self.cs[int(np.argmin(self.variances))])

    def to_dict(self) -> dict:
        return {
            "cs": self.cs.tolist(),
            "variances": self.variances.tolist(),
            "c_star": self.c_star,
            "argmin": self.argmin,
        }


def variance_curve(
    t: Target,
    g: Gaussian,
    cs: Sequence[float],
    n: int,
    rng: RngState,
) -> VarianceCurve:
    """
    Variance of the control-variate estimator for each c, on one set of draws

    The curve is a parabola in c with vertex at c_star.
    """
    if n < MIN_VARIANCE_SAMPLES:
        raise ValueError(f"Need at least {MIN_VARIANCE_SAMPLES} draws, got {n}")
    _check_dims(t, g)
    X = sample(g, rng, n)
    grads = t.gradient_batch(X)
    scores = stein_score(g, X)
    variances = np.array([
        float(_centered_sq_norms(grads - c * scores).mean() * n / (n - 1)) for c in cs
    ])
    estimate = _mean_hessian_trace(t, X) / g.precision_trace
    logger.debug(f"Variance curve over {len(cs)} coefficients, c* = {estimate:.4f}")
    return VarianceCurve(cs=np.asarray(cs, dtype=float), variances=variances, c_star=estimate)
