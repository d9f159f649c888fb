"""
Optimization schemes on the Bures-Wasserstein space
SVRGVI and SGVI (forward-backward Euler) and the BWGD forward-Euler baseline
"""

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np
from numpy.typing import NDArray

from geometry.exceptions import (
    ConvergenceFailure,
    NotPositiveDefinite,
    NotPositiveSemiDefinite,
    NotSymmetric,
)
from geometry.gaussian import Gaussian, kl_gaussian, w2_squared
from geometry.linalg import chol_inverse, spectral_map, symmetrize
from geometry.rng import RngState

from .estimators import CPolicy, GradientEstimate, mc_estimate, vr_estimate
from .targets import Target

logger = logging.getLogger(__name__)

DIVERGENCE_THRESHOLD = 1e12
STEP_FAILURES = (NotPositiveDefinite, NotPositiveSemiDefinite, ConvergenceFailure, NotSymmetric)


class Algorithm(Enum):
    SVRGVI = "svrgvi"
    SGVI = "sgvi"
    BWGD = "bwgd"


@dataclass
class RunConfig:
    """
    One optimizer run

    sgvi requires the zero policy and svrgvi a non-zero one; bwgd always uses plain
    Monte Carlo and ignores the policy.
    """
    algorithm: Algorithm
    eta: float
    steps: int
    c_policy: CPolicy = field(default_factory=CPolicy.zero)
    minibatch: int = 1
    seed: int = 0
    record_every: int = 1
    track_variance: bool = False
    variance_draws: int = 5000
    objective_samples: int = 256
    divergence_threshold: float = DIVERGENCE_THRESHOLD
    record_timing: bool = True
    name: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.algorithm, str):
            self.algorithm = Algorithm(self.algorithm)
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValueError(f"Step size must be positive, got {self.eta}")
        if self.steps < 1:
            raise ValueError(f"Steps must be >= 1, got {self.steps}")
        if self.minibatch < 1 or self.record_every < 1:
            raise ValueError("Minibatch size and record cadence must be >= 1")
        if self.algorithm == Algorithm.SGVI and not self.c_policy.is_zero:
            raise ValueError("sgvi runs use the zero coefficient policy")
        if self.algorithm == Algorithm.SVRGVI and self.c_policy.is_zero:
            raise ValueError("svrgvi runs need a non-zero coefficient policy")

    @property
    def label(self) -> str:
        """Short name used for trace files and aggregate rows"""
        if self.name:
            return self.name
        parts = [self.algorithm.value]
        if self.algorithm == Algorithm.SVRGVI:
            policy = self.c_policy
            parts.append(f"c{policy.c:g}" if policy.variant.value == "fixed" else "cadaptive")
        if self.minibatch > 1:
            parts.append(f"m{self.minibatch}")
        return "-".join(parts)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm.value,
            "eta": self.eta,
            "steps": self.steps,
            "c_policy": self.c_policy.to_dict(),
            "minibatch": self.minibatch,
            "seed": self.seed,
            "record_every": self.record_every,
            "track_variance": self.track_variance,
            "variance_draws": self.variance_draws,
            "objective_samples": self.objective_samples,
            "divergence_threshold": self.divergence_threshold,
            "record_timing": self.record_timing,
            "name": self.label,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        data["c_policy"] = CPolicy.from_dict(data.get("c_policy") or {"variant": "zero"})
        return cls(**data)


@dataclass
class IterRecord:
    """Metrics for one recorded iteration; None marks an unavailable metric"""
    iter: int
    kl: Optional[float] = None
    f: Optional[float] = None
    w2sq: Optional[float] = None
    var_mc: Optional[float] = None
    var_vr: Optional[float] = None
    c_used: float = 0.0
    diverged: bool = False
    wall_ns: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Trace:
    """
    Snapshots and records of one run, truncated and flagged when it diverged

    iterates[i] is the Gaussian that records[i] describes. When a step fails, the last
    record is the diverged one and its iterate is the last Gaussian reached before the failure.
    """
    config: RunConfig
    iterates: List[Gaussian] = field(default_factory=list)
    records: List[IterRecord] = field(default_factory=list)
    diverged: bool = False

    @property
    def final(self) -> Gaussian:
        return self.iterates[-1]

    @property
    def final_record(self) -> IterRecord:
        return self.records[-1]

    def kl_series(self) -> NDArray:
        return np.array([np.nan if r.kl is None else r.kl for r in self.records])

    def equals(self, other: "Trace") -> bool:
        """Field-wise equality ignoring wall time"""
        if self.diverged != other.diverged or len(self.records) != len(other.records):
            return False
        for a, b in zip(self.records, other.records):
            left, right = a.to_dict(), b.to_dict()
            left.pop("wall_ns")
            right.pop("wall_ns")
            if left != right:
                return False
        return all(
            np.array_equal(p.mean, q.mean) and np.array_equal(p.cov, q.cov)
            for p, q in zip(self.iterates, other.iterates)
        )


def backward_step(sigma_half: NDArray, eta: float) -> NDArray:
    """
    Closed-form entropy proximal step on covariances

    Each eigenvalue lambda of Sigma_half maps to (lambda + 2 eta + sqrt(lambda (lambda + 4 eta))) / 2,
    which is exact because Sigma_half and Sigma_half + 4 eta I commute.

    Returns:
        PD matrix with lambda_min >= eta

    Raises:
        NotPositiveSemiDefinite: if Sigma_half has a materially negative eigenvalue
    """
    if eta <= 0:
        raise ValueError(f"Step size must be positive, got {eta}")
    return spectral_map(
        sigma_half,
        lambda w: 0.5 * (w + 2.0 * eta + np.sqrt(w * (w + 4.0 * eta))),
        psd=True,
    )


def fb_step(g: Gaussian, est: GradientEstimate, eta: float) -> Gaussian:
    """
    Forward step on the potential followed by the backward step on the entropy

    m' = m - eta b, Sigma_half = M Sigma M^T with M = I - eta S
    """
    if eta <= 0:
        raise ValueError(f"Step size must be positive, got {eta}")
    mean = g.mean - eta * est.b
    M = np.eye(g.dim) - eta * symmetrize(est.S)
    sigma_half = symmetrize(M @ g.cov @ M.T)
    return Gaussian(mean, backward_step(sigma_half, eta))


def bwgd_step(g: Gaussian, est: GradientEstimate, eta: float) -> Gaussian:
    """
    Forward-Euler step on the full KL: M = I - eta (S - Sigma^{-1}), Sigma' = M Sigma M^T

    Raises:
        NotPositiveDefinite: when the update loses definiteness (BWGD instability)
    """
    if eta <= 0:
        raise ValueError(f"Step size must be positive, got {eta}")
    mean = g.mean - eta * est.b
    M = np.eye(g.dim) - eta * (symmetrize(est.S) - chol_inverse(g.chol))
    return Gaussian(mean, symmetrize(M @ g.cov @ M.T))


class _Recorder:
    """Computes per-iteration metrics on a stream separate from the estimator draws"""

    def __init__(self, config: RunConfig, target: Target, rng: RngState):
        # diagnostics depends on inference, so the metric helpers load at run time
        from diagnostics.variance import objective_f, variance_gap_empirical

        self._objective = objective_f
        self._variance = variance_gap_empirical
        self.config = config
        self.target = target
        self.rng = rng
        self.started = time.perf_counter_ns()

    def record(self, k: int, g: Gaussian, c_used: float) -> IterRecord:
        rec = IterRecord(iter=k, c_used=c_used)
        optimum = self.target.optimum
        if optimum is not None:
            rec.kl = kl_gaussian(g, optimum)
            rec.w2sq = w2_squared(g, optimum)
        else:
            rec.f = self._objective(self.target, g, self.config.objective_samples, self.rng)
        if self.config.track_variance:
            report = self._variance(self.target, g, c_used, self.config.variance_draws, self.rng)
            rec.var_mc = report.var_mc
            rec.var_vr = report.var_vr
        if self.config.record_timing:
            rec.wall_ns = time.perf_counter_ns() - self.started

        watched = rec.kl if rec.kl is not None else rec.f
        if watched is not None and not (math.isfinite(watched) and abs(watched) <= self.config.divergence_threshold):
            rec.diverged = True
        return rec


def _estimate(config: RunConfig, target: Target, g: Gaussian, rng: RngState) -> GradientEstimate:
    if config.algorithm == Algorithm.SVRGVI:
        return vr_estimate(target, g, rng, config.minibatch, config.c_policy)
    return mc_estimate(target, g, rng, config.minibatch)


def run(config: RunConfig, target: Target, init: Optional[Gaussian] = None) -> Trace:
    """
    Iterate the configured scheme from init for config.steps steps

    Records iteration 0, every record_every-th iteration and the last one. A step that
    loses definiteness or produces non-finite values ends the run with a truncated,
    diverged Trace instead of raising.

    Args:
        config: Run configuration
        target: Target potential
        init: Initial Gaussian, N(0, I) when omitted

    Returns:
        Trace
    """
    init = init or Gaussian.standard(target.dim)
    if init.dim != target.dim:
        raise ValueError(f"Initial Gaussian has dim {init.dim}, target has {target.dim}")

    root = RngState(config.seed)
    draws = root.child(0)
    recorder = _Recorder(config, target, root.child(1))
    step = bwgd_step if config.algorithm == Algorithm.BWGD else fb_step
    trace = Trace(config=config)

    g = init
    c_last = 0.0
    for k in range(config.steps + 1):
        est = None
        if k < config.steps:
            est = _estimate(config, target, g, draws)
            c_last = est.c_used

        if k % config.record_every == 0 or k == config.steps:
            rec = recorder.record(k, g, c_last)
            trace.iterates.append(g)
            trace.records.append(rec)
            if rec.diverged:
                trace.diverged = True
                logger.warning(f"{config.label} seed {config.seed} diverged at iteration {k}")
                break

        if est is None:
            break
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                g = step(g, est, config.eta)
        except STEP_FAILURES as e:
            trace.diverged = True
            trace.iterates.append(g)
            trace.records.append(IterRecord(iter=k + 1, c_used=c_last, diverged=True))
            logger.warning(f"{config.label} seed {config.seed} diverged at iteration {k + 1}: {e}")
            break

    return trace
