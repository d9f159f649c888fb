"""
Dense symmetric / SPD linear algebra primitives
Cholesky factors, triangular solves, spectral maps and square roots
"""

import logging
from dataclasses import dataclass
from threading import Lock
from typing import Callable, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import LinAlgError, cho_solve, cholesky as _scipy_cholesky, eigh, solve_triangular

from .exceptions import (
    ConvergenceFailure,
    DimensionMismatch,
    NotPositiveDefinite,
    NotPositiveSemiDefinite,
    NotSymmetric,
)

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10
CLAMP_TOL = 1e-10
PIVOT_TOL = 1e-12

_factorizations = 0
_counter_lock = Lock()


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor L of an SPD matrix A = L L^T"""
    lower: NDArray

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def reconstruct(self) -> NDArray:
        """Return L L^T"""
        return self.lower @ self.lower.T


def factorization_count() -> int:
    """Number of Cholesky factorizations performed by this process so far"""
    with _counter_lock:
        return _factorizations


def _count_factorization():
    global _factorizations
    with _counter_lock:
        _factorizations += 1


def symmetrize(A: NDArray) -> NDArray:
    """(A + A^T) / 2"""
    A = np.asarray(A, dtype=float)
    return 0.5 * (A + A.T)


def _require_square(A: NDArray) -> NDArray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got shape {A.shape}")
    return A


def check_symmetric(A: NDArray, tol: float = SYMMETRY_TOL) -> NDArray:
    """
    Validate symmetry and return the explicitly symmetrized matrix

    Args:
        A: Square matrix
        tol: Allowed asymmetry, relative to max(1, max|A|)

    Returns:
        (A + A^T) / 2
    """
    A = _require_square(A)
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    asym = float(np.max(np.abs(A - A.T))) if A.size else 0.0
    if asym > tol * scale:
        raise NotSymmetric(f"Matrix asymmetry {asym:.3e} exceeds tolerance")
    return symmetrize(A)


def cholesky(A: NDArray) -> CholeskyFactor:
    """
    Cholesky factorization with a pivot gate

    Args:
        A: Symmetric matrix

    Returns:
        CholeskyFactor with strictly positive diagonal

    Raises:
        NotPositiveDefinite: if any pivot <= 1e-12 * max(1, max diagonal)
    """
    A = check_symmetric(A)
    _count_factorization()
    try:
        L = _scipy_cholesky(A, lower=True, check_finite=True)
    except (LinAlgError, ValueError) as e:
        raise NotPositiveDefinite(f"Cholesky failed: {e}") from e

    pivots = np.diag(L) ** 2
    max_diag = float(np.max(np.diag(A)))
    # the gate never drops below an absolute 1e-12
    if max_diag <= 0 or np.any(pivots <= PIVOT_TOL * max(1.0, max_diag)):
        raise NotPositiveDefinite(
            f"Degenerate pivot {float(np.min(pivots)):.3e} (max diagonal {max_diag:.3e})"
        )
    return CholeskyFactor(lower=L)


def chol_solve(L: CholeskyFactor, v: NDArray) -> NDArray:
    """
    Solve A x = v with A = L L^T using two triangular solves (O(d^2) per column)

    Args:
        L: Cholesky factor of A
        v: Right-hand side of shape (d,) or (d, k)

    Returns:
        A^{-1} v with the shape of v
    """
    v = np.asarray(v, dtype=float)
    if v.shape[0] != L.dim:
        raise DimensionMismatch(f"Factor has dim {L.dim}, right-hand side has {v.shape}")
    return cho_solve((L.lower, True), v, check_finite=False)


def chol_inverse(L: CholeskyFactor) -> NDArray:
    """A^{-1} from the factor, explicitly symmetrized"""
    return symmetrize(chol_solve(L, np.eye(L.dim)))


def chol_inverse_trace(L: CholeskyFactor) -> float:
    """Tr(A^{-1}) = ||L^{-1}||_F^2"""
    Linv = solve_triangular(L.lower, np.eye(L.dim), lower=True, check_finite=False)
    return float(np.sum(Linv * Linv))


def logdet(L: CholeskyFactor) -> float:
    """log det A = 2 sum log diag(L)"""
    return float(2.0 * np.sum(np.log(np.diag(L.lower))))


def sym_eigen(A: NDArray) -> Tuple[NDArray, NDArray]:
    """
    Symmetric eigendecomposition A = Q diag(w) Q^T

    Returns:
        Tuple of (ascending eigenvalues, orthogonal eigenvectors as columns)
    """
    A = check_symmetric(A)
    try:
        w, Q = eigh(A, check_finite=True)
    except (LinAlgError, ValueError) as e:
        raise ConvergenceFailure(f"Symmetric eigensolver did not converge: {e}") from e
    return w, Q


def _clamp_spectrum(w: NDArray, psd: bool) -> NDArray:
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    floor = -CLAMP_TOL * scale
    if np.any(w < floor):
        raise NotPositiveSemiDefinite(f"Minimum eigenvalue {float(w[0]):.3e} below {floor:.3e}")
    if psd:
        negative = w < 0
        if np.any(negative):
            logger.debug(f"Clamping {int(negative.sum())} tiny negative eigenvalues to zero")
        return np.where(negative, 0.0, w)
    if np.any(w <= 0):
        raise NotPositiveDefinite(f"Minimum eigenvalue {float(w[0]):.3e} is not positive")
    return w


def spectral_map(A: NDArray, fn: Callable[[NDArray], NDArray], psd: bool = True) -> NDArray:
    """
    Apply a scalar function to the spectrum of a symmetric matrix

    Args:
        A: Symmetric PSD (or PD when psd=False) matrix
        fn: Vectorized scalar map applied per eigenvalue
        psd: Clamp eigenvalues in [-tol, 0) to zero instead of rejecting them

    Returns:
        Q diag(fn(w)) Q^T, symmetric by construction
    """
    w, Q = sym_eigen(A)
    w = _clamp_spectrum(w, psd=psd)
    return symmetrize((Q * fn(w)) @ Q.T)


def spd_sqrt(A: NDArray) -> NDArray:
    """Symmetric square root of a PSD matrix"""
    return spectral_map(A, np.sqrt, psd=True)


def spd_inv_sqrt(A: NDArray) -> NDArray:
    """Symmetric inverse square root of a PD matrix"""
    return spectral_map(A, lambda w: 1.0 / np.sqrt(w), psd=False)


def min_eigenvalue(A: NDArray) -> float:
    return float(sym_eigen(A)[0][0])
