"""
Estimators of the Bures-Wasserstein gradient components E[grad V] and E[Hessian V]
Plain Monte Carlo and the score control variate
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from geometry.gaussian import Gaussian, sample, stein_score
from geometry.linalg import symmetrize
from geometry.rng import RngState

from .targets import Target

logger = logging.getLogger(__name__)

DEFAULT_CLAMP = (0.05, 1.0)


class CVariant(Enum):
    """How the control-variate coefficient is chosen"""
    FIXED = "fixed"
    ADAPTIVE = "adaptive"
    ZERO = "zero"


@dataclass(frozen=True)
class CPolicy:
    """
    Control-variate coefficient policy

    fixed: a constant c in [0, 2] (sweeps include both endpoints)
    adaptive: c = clamp(Tr(S) / Tr(Sigma^{-1}), lo, hi) from the current draws
    zero: pure Monte Carlo
    """
    variant: CVariant
    c: float = 0.0
    clamp: Tuple[float, float] = DEFAULT_CLAMP

    def __post_init__(self):
        lo, hi = self.clamp
        if not (0.0 <= lo <= hi):
            raise ValueError(f"Invalid clamp interval {self.clamp}")
        if self.variant == CVariant.FIXED and not (0.0 <= self.c <= 2.0):
            raise ValueError(f"Fixed coefficient must lie in [0, 2], got {self.c}")

    @classmethod
    def fixed(cls, c: float) -> "CPolicy":
        return cls(CVariant.FIXED, c=float(c))

    @classmethod
    def adaptive(cls, lo: float = DEFAULT_CLAMP[0], hi: float = DEFAULT_CLAMP[1]) -> "CPolicy":
        return cls(CVariant.ADAPTIVE, clamp=(float(lo), float(hi)))

    @classmethod
    def zero(cls) -> "CPolicy":
        return cls(CVariant.ZERO)

    @property
    def is_zero(self) -> bool:
        return self.variant == CVariant.ZERO

    def to_dict(self) -> dict:
        data = {"variant": self.variant.value}
        if self.variant == CVariant.FIXED:
            data["c"] = self.c
        if self.variant == CVariant.ADAPTIVE:
            data["clamp"] = list(self.clamp)
        return data

    @classmethod
    def from_dict(cls, data: dict, default_clamp: Tuple[float, float] = DEFAULT_CLAMP) -> "CPolicy":
        """Rebuild a policy; adaptive policies without a clamp use default_clamp"""
        variant = CVariant(data.get("variant", "zero"))
        if variant == CVariant.FIXED:
            return cls.fixed(data["c"])
        if variant == CVariant.ADAPTIVE:
            lo, hi = data.get("clamp", default_clamp)
            return cls.adaptive(lo, hi)
        return cls.zero()


@dataclass
class GradientEstimate:
    """b estimates E[grad V], S estimates E[Hessian V] over the same draws"""
    b: NDArray
    S: NDArray
    c_used: float
    samples: NDArray = field(repr=False)


def _draw(t: Target, g: Gaussian, rng: RngState, m: int) -> Tuple[NDArray, NDArray, NDArray]:
    if m < 1:
        raise ValueError(f"Minibatch size must be >= 1, got {m}")
    if t.dim != g.dim:
        raise ValueError(f"Target dimension {t.dim} does not match Gaussian dimension {g.dim}")
    X = sample(g, rng, m)
    grads = t.gradient_batch(X)
    if t.constant_hessian:
        S = t.hessian(X[0])
    else:
        S = t.hessian_batch(X).mean(axis=0)
    return X, grads, symmetrize(S)


def mc_estimate(t: Target, g: Gaussian, rng: RngState, m: int = 1) -> GradientEstimate:
    """
    Plain Monte Carlo estimate from m i.i.d. draws of g

    Returns:
        GradientEstimate with c_used = 0
    """
    X, grads, S = _draw(t, g, rng, m)
    return GradientEstimate(b=grads.mean(axis=0), S=S, c_used=0.0, samples=X)


def resolve_c(policy: CPolicy, S: NDArray, sigma_inv_trace: float) -> float:
    """
    Resolve the control-variate coefficient for one iteration

    Args:
        policy: Coefficient policy
        S: Hessian estimate of this iteration
        sigma_inv_trace: Tr(Sigma^{-1}) of the current Gaussian

    Returns:
        The coefficient c
    """
    if sigma_inv_trace <= 0:
        raise ValueError(f"Tr(Sigma^-1) must be positive, got {sigma_inv_trace}")
    if policy.variant == CVariant.ZERO:
        return 0.0
    if policy.variant == CVariant.FIXED:
        return policy.c

    raw = float(np.trace(S)) / sigma_inv_trace
    lo, hi = policy.clamp
    c = min(max(raw, lo), hi)
    if c != raw:
        logger.debug(f"Adaptive coefficient {raw:.4f} clamped to {c:.4f}")
    return c


def vr_estimate(
    t: Target,
    g: Gaussian,
    rng: RngState,
    m: int = 1,
    policy: Optional[CPolicy] = None,
) -> GradientEstimate:
    """
    Control-variate estimate b = mean[grad V(X) - c Sigma^{-1}(X - m)]

    The score has mean zero under g, so b stays unbiased for any c. S is the plain
    Hessian average on the same draws. Sigma^{-1}(X - m) reuses the cached factor of g.

    Args:
        t: Target
        g: Current Gaussian
        rng: Stream the draws come from
        m: Minibatch size
        policy: Coefficient policy (adaptive when omitted)

    Returns:
        GradientEstimate
    """
    policy = policy or CPolicy.adaptive()
    X, grads, S = _draw(t, g, rng, m)
    c = resolve_c(policy, S, g.precision_trace)
    if c == 0.0:
        return GradientEstimate(b=grads.mean(axis=0), S=S, c_used=0.0, samples=X)

    b = (grads - c * stein_score(g, X)).mean(axis=0)
    return GradientEstimate(b=b, S=S, c_used=c, samples=X)


def vr_c_upper_bound(
    t: Target,
    g: Gaussian,
    n: int,
    rng: RngState,
) -> Tuple[float, Optional[float]]:
    """
    Coefficients below which the control variate reduces variance

    For convex V the gap 2c Tr(E Hessian) - c^2 Tr(Sigma^{-1}) is positive on
    (0, 2 Tr(E Hessian) / Tr(Sigma^{-1})). For alpha-strongly convex V the
    distribution-free bound 2 alpha d / Tr(Sigma^{-1}) is reported too.

    Returns:
        Tuple of (empirical upper bound, strongly convex bound or None)
    """
    if n < 1:
        raise ValueError(f"Sample count must be >= 1, got {n}")
    X = sample(g, rng, n)
    hess_trace = float(np.mean(t.hessian_trace_batch(X)))
    inv_trace = g.precision_trace
    strong = None
    if t.alpha is not None and t.alpha > 0:
        strong = 2.0 * t.alpha * g.dim / inv_trace
    return 2.0 * hess_trace / inv_trace, strong
