"""
Gaussian distributions on the Bures-Wasserstein space
Sampling and the closed-form geometry: W2, Bures metric, KL, entropy, OT maps, scores
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .exceptions import DimensionMismatch, NotPositiveDefinite
from .linalg import (
    CholeskyFactor,
    chol_inverse_trace,
    chol_solve,
    cholesky,
    logdet,
    spd_inv_sqrt,
    spd_sqrt,
    symmetrize,
)
from .rng import RngState

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)


def _frozen(a: NDArray) -> NDArray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Gaussian:
    """
    N(mean, cov) with an eagerly computed, immutable Cholesky factor

    Every Sigma^{-1} v for this distribution goes through the cached factor.
    """
    mean: NDArray
    cov: NDArray
    chol: Optional[CholeskyFactor] = field(default=None, repr=False)

    def __post_init__(self):
        mean = _frozen(np.atleast_1d(self.mean))
        cov = _frozen(np.atleast_2d(self.cov))
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(f"Mean shape {mean.shape} incompatible with cov shape {cov.shape}")
        if not np.all(np.isfinite(mean)):
            raise NotPositiveDefinite("Mean has non-finite entries")
        cov = _frozen(symmetrize(cov))
        chol = self.chol if self.chol is not None else cholesky(cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", chol)

    @classmethod
    def standard(cls, dim: int) -> "Gaussian":
        """N(0, I_d)"""
        return cls(np.zeros(dim), np.eye(dim))

    @property
    def dim(self) -> int:
        return self.mean.size

    @cached_property
    def precision_trace(self) -> float:
        """Tr(Sigma^{-1})"""
        return chol_inverse_trace(self.chol)

    @cached_property
    def log_det_cov(self) -> float:
        return logdet(self.chol)

    def log_density(self, x: NDArray) -> NDArray:
        """log N(x; m, Sigma) for a point (d,) or batch (n, d)"""
        x = np.asarray(x, dtype=float)
        diff = x - self.mean
        score = stein_score(self, x)
        quad = np.sum(diff * score, axis=-1)
        return -0.5 * (self.dim * LOG_2PI + self.log_det_cov + quad)

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "cov": self.cov.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Gaussian":
        return cls(np.asarray(data["mean"]), np.asarray(data["cov"]))


def _same_dim(p0: Gaussian, p1: Gaussian):
    if p0.dim != p1.dim:
        raise DimensionMismatch(f"Gaussians of dimension {p0.dim} and {p1.dim}")


def sample(g: Gaussian, rng: RngState, n: int) -> NDArray:
    """
    Draw n samples m + L z, reusing the cached factor

    Returns:
        Array of shape (n, d)
    """
    if n < 1:
        raise ValueError(f"Sample count must be >= 1, got {n}")
    z = rng.standard_normal((n, g.dim))
    return g.mean + z @ g.chol.lower.T


def stein_score(g: Gaussian, x: NDArray) -> NDArray:
    """Sigma^{-1}(x - m) for a point (d,) or batch (n, d), via two triangular solves"""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != g.dim:
        raise DimensionMismatch(f"Point dimension {x.shape[-1]} does not match Gaussian dimension {g.dim}")
    diff = x - g.mean
    if diff.ndim == 1:
        return chol_solve(g.chol, diff)
    return chol_solve(g.chol, diff.T).T


def bures_squared(cov0: NDArray, cov1: NDArray) -> float:
    """Tr(S0 + S1 - 2 (S0^{1/2} S1 S0^{1/2})^{1/2}), clamped at zero"""
    cov0 = np.asarray(cov0, dtype=float)
    cov1 = np.asarray(cov1, dtype=float)
    if cov0.shape != cov1.shape:
        raise DimensionMismatch(f"Covariances of shape {cov0.shape} and {cov1.shape}")
    root0 = spd_sqrt(cov0)
    cross = spd_sqrt(symmetrize(root0 @ cov1 @ root0))
    value = float(np.trace(cov0) + np.trace(cov1) - 2.0 * np.trace(cross))
    return max(value, 0.0)


def w2_squared(p0: Gaussian, p1: Gaussian) -> float:
    """Squared 2-Wasserstein distance between Gaussians"""
    _same_dim(p0, p1)
    shift = p0.mean - p1.mean
    return float(shift @ shift) + bures_squared(p0.cov, p1.cov)


def kl_gaussian(p0: Gaussian, p1: Gaussian) -> float:
    """KL(p0 || p1) in closed form"""
    _same_dim(p0, p1)
    d = p0.dim
    shift = p1.mean - p0.mean
    trace_term = float(np.trace(chol_solve(p1.chol, p0.cov)))
    quad = float(shift @ chol_solve(p1.chol, shift))
    value = 0.5 * (trace_term + quad - d + p1.log_det_cov - p0.log_det_cov)
    return max(value, 0.0)


def entropy(g: Gaussian) -> float:
    """Differential entropy; the negative entropy functional is -entropy(g)"""
    d = g.dim
    return 0.5 * (d * LOG_2PI + d + g.log_det_cov)


def ot_map_linear(p0: Gaussian, p1: Gaussian) -> NDArray:
    """Linear part A of the optimal transport map T(x) = m1 + A (x - m0)"""
    _same_dim(p0, p1)
    root0 = spd_sqrt(p0.cov)
    inv_root0 = spd_inv_sqrt(p0.cov)
    cross = spd_sqrt(symmetrize(root0 @ p1.cov @ root0))
    return symmetrize(inv_root0 @ cross @ inv_root0)


def ot_map(p0: Gaussian, p1: Gaussian, x: NDArray) -> NDArray:
    """Push a point (d,) or batch (n, d) through the optimal transport map from p0 to p1"""
    A = ot_map_linear(p0, p1)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != p0.dim:
        raise DimensionMismatch(f"Point dimension {x.shape[-1]} does not match {p0.dim}")
    return p1.mean + (x - p0.mean) @ A.T
