"""
Target potentials V with hand-coded gradients and Hessians
Gaussian, multivariate Student-t and Bayesian logistic regression targets
"""

import csv
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit

from geometry.exceptions import DimensionMismatch
from geometry.gaussian import Gaussian
from geometry.linalg import chol_inverse, chol_solve, cholesky, sym_eigen
from geometry.rng import RngState

logger = logging.getLogger(__name__)

FD_STEP = 1e-5


class Target(ABC):
    """
    Unnormalized log-density pi(x) ~ exp(-V(x))

    Subclasses implement the batched handles; the single-point handles are views of them.
    Metadata: alpha (strong convexity), beta (smoothness), ell (Laplacian smoothness),
    optimum (exact Gaussian optimum when pi is itself Gaussian).
    """

    kind = "target"
    constant_hessian = False

    def __init__(
        self,
        dim: int,
        alpha: Optional[float] = None,
        beta: Optional[float] = None,
        ell: Optional[float] = None,
        optimum: Optional[Gaussian] = None,
    ):
        self.dim = int(dim)
        self.alpha = alpha
        self.beta = beta
        self.ell = ell
        self.optimum = optimum

    @property
    @abstractmethod
    def center(self) -> NDArray:
        """A representative point (mode or location) used for checks and initialization"""

    @abstractmethod
    def potential_batch(self, X: NDArray) -> NDArray:
        """V at each row of X, shape (n,)"""

    @abstractmethod
    def gradient_batch(self, X: NDArray) -> NDArray:
        """grad V at each row of X, shape (n, d)"""

    @abstractmethod
    def hessian_batch(self, X: NDArray) -> NDArray:
        """Hessian of V at each row of X, shape (n, d, d)"""

    def hessian_trace_batch(self, X: NDArray) -> NDArray:
        """Laplacian of V at each row of X, shape (n,)"""
        return np.trace(self.hessian_batch(X), axis1=1, axis2=2)

    def _rows(self, X: NDArray) -> NDArray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"Target has dim {self.dim}, points have {X.shape[1]}")
        return X

    def potential(self, x: NDArray) -> float:
        return float(self.potential_batch(x)[0])

    def gradient(self, x: NDArray) -> NDArray:
        return self.gradient_batch(x)[0]

    def hessian(self, x: NDArray) -> NDArray:
        return self.hessian_batch(x)[0]

    def metadata(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "alpha": self.alpha,
            "beta": self.beta,
            "ell": self.ell,
            "has_optimum": self.optimum is not None,
        }


class GaussianTarget(Target):
    """V(x) = 1/2 (x - m)^T Sigma^{-1} (x - m)"""

    kind = "gaussian"
    constant_hessian = True

    def __init__(self, mean: NDArray, cov: NDArray):
        self.distribution = Gaussian(mean, cov)
        self.precision = chol_inverse(self.distribution.chol)
        eigvals = sym_eigen(self.precision)[0]
        super().__init__(
            dim=self.distribution.dim,
            alpha=float(eigvals[0]),
            beta=float(eigvals[-1]),
            ell=0.0,
            optimum=self.distribution,
        )

    @property
    def center(self) -> NDArray:
        return self.distribution.mean

    def potential_batch(self, X: NDArray) -> NDArray:
        X = self._rows(X)
        diff = X - self.distribution.mean
        return 0.5 * np.sum(diff * (diff @ self.precision), axis=1)

    def gradient_batch(self, X: NDArray) -> NDArray:
        X = self._rows(X)
        return (X - self.distribution.mean) @ self.precision

    def hessian_batch(self, X: NDArray) -> NDArray:
        X = self._rows(X)
        return np.broadcast_to(self.precision, (X.shape[0], self.dim, self.dim)).copy()

    def hessian_trace_batch(self, X: NDArray) -> NDArray:
        X = self._rows(X)
        return np.full(X.shape[0], float(np.trace(self.precision)))


class StudentTTarget(Target):
    """
    Multivariate Student-t with location mu, scale Sigma and nu degrees of freedom

    V(x) = (nu + d)/2 * log(1 + q/nu), q = (x - mu)^T Sigma^{-1} (x - mu).
    Heavy tails make V non-convex away from the location, so alpha/beta/ell are absent.
    """

    kind = "student_t"

    def __init__(self, loc: NDArray, scale: NDArray, nu: float):
        if nu <= 0:
            raise ValueError(f"Degrees of freedom must be positive, got {nu}")
        self.loc = np.asarray(loc, dtype=float)
        self.scale_factor = cholesky(scale)
        self.scale = self.scale_factor.reconstruct()
        self.precision = chol_inverse(self.scale_factor)
        self.nu = float(nu)
        super().__init__(dim=self.loc.size)

    @property
    def center(self) -> NDArray:
        return self.loc

    def _whiten(self, X: NDArray) -> Tuple[NDArray, NDArray]:
        diff = self._rows(X) - self.loc
        w = chol_solve(self.scale_factor, diff.T).T
        q = np.sum(diff * w, axis=1)
        return w, q

    def potential_batch(self, X: NDArray) -> NDArray:
        _, q = self._whiten(X)
        return 0.5 * (self.nu + self.dim) * np.log1p(q / self.nu)

    def gradient_batch(self, X: NDArray) -> NDArray:
        w, q = self._whiten(X)
        return ((self.nu + self.dim) / (self.nu + q))[:, None] * w

    def hessian_batch(self, X: NDArray) -> NDArray:
        w, q = self._whiten(X)
        first = (self.nu + self.dim) / (self.nu + q)
        second = 2.0 * (self.nu + self.dim) / (self.nu + q) ** 2
        outer = np.einsum("ni,nj->nij", w, w)
        return first[:, None, None] * self.precision - second[:, None, None] * outer

    def hessian_trace_batch(self, X: NDArray) -> NDArray:
        w, q = self._whiten(X)
        first = (self.nu + self.dim) / (self.nu + q)
        second = 2.0 * (self.nu + self.dim) / (self.nu + q) ** 2
        return first * float(np.trace(self.precision)) - second * np.sum(w * w, axis=1)


@dataclass
class LogRegData:
    """Covariates X (n x d) and binary labels Y (n,)"""
    X: NDArray
    Y: NDArray

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.Y = np.asarray(self.Y, dtype=float).reshape(-1)
        if self.X.shape[0] != self.Y.size or self.X.shape[0] < 1 or self.X.shape[1] < 1:
            raise DimensionMismatch(f"Covariates {self.X.shape} and labels {self.Y.shape} disagree")
        if not np.all((self.Y == 0) | (self.Y == 1)):
            raise ValueError("Labels must be 0 or 1")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def to_csv(self, path: Path):
        """Write columns x_1..x_d, y"""
        path = Path(path)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow([f"x_{i + 1}" for i in range(self.dim)] + ["y"])
            for row, label in zip(self.X, self.Y):
                writer.writerow([repr(float(v)) for v in row] + [int(label)])
        logger.info(f"Wrote logistic regression data ({self.n} x {self.dim}) to {path}")

    @classmethod
    def from_csv(cls, path: Path) -> "LogRegData":
        with open(Path(path), "r", newline="") as f:
            reader = csv.reader(f)
            header = next(reader)
            if not header or header[-1] != "y":
                raise ValueError(f"Unexpected header in {path}: {header[:3]}...")
            rows = [[float(v) for v in row] for row in reader if row]
        table = np.asarray(rows, dtype=float)
        return cls(X=table[:, :-1], Y=table[:, -1])


class LogRegTarget(Target):
    """Negative log posterior of Bayesian logistic regression with a flat prior"""

    kind = "logreg"

    def __init__(self, data: LogRegData):
        self.data = data
        gram = data.X.T @ data.X
        beta = 0.25 * float(sym_eigen(gram)[0][-1])
        super().__init__(dim=data.dim, alpha=0.0, beta=beta)

    @property
    def center(self) -> NDArray:
        return np.zeros(self.dim)

    def _logits(self, X: NDArray) -> NDArray:
        return self._rows(X) @ self.data.X.T

    def potential_batch(self, X: NDArray) -> NDArray:
        z = self._logits(X)
        return np.sum(np.logaddexp(0.0, z) - self.data.Y * z, axis=1)

    def gradient_batch(self, X: NDArray) -> NDArray:
        s = expit(self._logits(X))
        return (s - self.data.Y) @ self.data.X

    def hessian_batch(self, X: NDArray) -> NDArray:
        s = expit(self._logits(X))
        weights = s * (1.0 - s)
        return np.stack([(self.data.X.T * w) @ self.data.X for w in weights])

    def hessian_trace_batch(self, X: NDArray) -> NDArray:
        s = expit(self._logits(X))
        return (s * (1.0 - s)) @ np.sum(self.data.X ** 2, axis=1)


def gaussian_target(m_pi: NDArray, cov_pi: NDArray) -> GaussianTarget:
    return GaussianTarget(m_pi, cov_pi)


def student_t_target(loc: NDArray, scale: NDArray, nu: float) -> StudentTTarget:
    return StudentTTarget(loc, scale, nu)


def logreg_target(data: LogRegData) -> LogRegTarget:
    return LogRegTarget(data)


def generate_logreg_data(n: int, d: int, rng: RngState) -> LogRegData:
    """
    Synthetic logistic regression data

    X_i ~ N(0, I_d), theta* ~ N(0, I_d / d), Y_i ~ Bernoulli(sigmoid(<theta*, X_i>))
    """
    if n < 1 or d < 1:
        raise ValueError(f"Need n, d >= 1, got n={n}, d={d}")
    X = rng.standard_normal((n, d))
    theta = rng.standard_normal(d) / np.sqrt(d)
    Y = rng.binomial(1, expit(X @ theta)).astype(float)
    logger.debug(f"Generated logistic data n={n}, d={d}, label mean {Y.mean():.3f}")
    return LogRegData(X=X, Y=Y)


def random_gaussian_target(
    d: int,
    rng: RngState,
    scale: float = 10.0,
    floor: float = 20.0,
) -> GaussianTarget:
    """
    Random Gaussian target: mean ~ U[-2, 2]^d, Sigma = scale * A A^T / d + floor * I

    The floor keeps lambda_min(Sigma) above the unit step size so that eta = 1 is stable.
    """
    if d < 1:
        raise ValueError(f"Dimension must be >= 1, got {d}")
    mean = rng.uniform(-2.0, 2.0, d)
    A = rng.standard_normal((d, d))
    cov = scale * (A @ A.T) / d + floor * np.eye(d)
    target = GaussianTarget(mean, cov)
    condition = target.beta / target.alpha
    logger.info(f"Random Gaussian target d={d}, condition number {condition:.2f}")
    return target


def random_student_t_target(
    d: int,
    rng: RngState,
    nu: float = 4.0,
    scale: float = 10.0,
    floor: float = 20.0,
) -> StudentTTarget:
    """Student-t target with location and scale matrix drawn like random_gaussian_target"""
    if d < 1:
        raise ValueError(f"Dimension must be >= 1, got {d}")
    loc = rng.uniform(-2.0, 2.0, d)
    A = rng.standard_normal((d, d))
    target = StudentTTarget(loc, scale * (A @ A.T) / d + floor * np.eye(d), nu)
    logger.info(f"Random Student-t target d={d}, nu={nu}")
    return target


def check_derivatives(
    target: Target,
    rng: RngState,
    n_points: int = 20,
    spread: float = 1.0,
) -> Tuple[float, float]:
    """
    Central finite-difference check of the gradient and Hessian handles

    Points are drawn around target.center; steps are h_i = 1e-5 * (1 + |x_i|).

    Returns:
        Tuple of (worst gradient relative error, worst Hessian relative error)
    """
    d = target.dim
    worst_grad = 0.0
    worst_hess = 0.0
    points = target.center + spread * rng.standard_normal((n_points, d))
    for x in points:
        h = FD_STEP * (1.0 + np.abs(x))
        shifts = np.diag(h)
        forward = x + shifts
        backward = x - shifts

        fd_grad = (target.potential_batch(forward) - target.potential_batch(backward)) / (2.0 * h)
        grad = target.gradient(x)
        worst_grad = max(worst_grad, float(np.linalg.norm(fd_grad - grad) / max(np.linalg.norm(grad), 1.0)))

        fd_hess = (target.gradient_batch(forward) - target.gradient_batch(backward)) / (2.0 * h)[:, None]
        fd_hess = 0.5 * (fd_hess + fd_hess.T)
        hess = target.hessian(x)
        worst_hess = max(worst_hess, float(np.linalg.norm(fd_hess - hess) / max(np.linalg.norm(hess), 1.0)))

    return worst_grad, worst_hess
