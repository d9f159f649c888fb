"""
Laplace approximation baseline: N(mode, inverse Hessian at the mode)
"""

import logging

import numpy as np
from numpy.typing import NDArray

from geometry.exceptions import NoConvergence, NonPdHessianAtMode, NotPositiveDefinite
from geometry.gaussian import Gaussian
from geometry.linalg import chol_inverse, chol_solve, cholesky
from inference.targets import Target

logger = logging.getLogger(__name__)

MIN_STEP = 1e-10
LARGE_MODE_NORM = 1e6


def _newton_direction(t: Target, x: NDArray, grad: NDArray) -> NDArray:
    try:
        factor = cholesky(t.hessian(x))
    except NotPositiveDefinite:
        logger.debug("Hessian not PD along the path, using steepest descent")
        return -grad
    return -chol_solve(factor, grad)


def laplace_approx(t: Target, x0: NDArray, max_iter: int = 100, tol: float = 1e-8) -> Gaussian:
    """
    Damped Newton search for the mode, then N(x_MAP, Hessian(x_MAP)^{-1})

    Steps are halved until V decreases; a non-PD Hessian along the path falls back to
    the negative gradient.

    Args:
        t: Target
        x0: Starting point
        max_iter: Newton iteration cap
        tol: Stop once ||grad V|| < tol

    Returns:
        Gaussian

    Raises:
        NoConvergence: gradient still above tol after max_iter, or no decrease possible
        NonPdHessianAtMode: Hessian at the located mode is not PD
    """
    x = np.array(x0, dtype=float).reshape(-1)
    if x.size != t.dim:
        raise ValueError(f"Starting point has dim {x.size}, target has {t.dim}")

    grad = t.gradient(x)
    iterations = 0
    while np.linalg.norm(grad) >= tol:
        if iterations >= max_iter:
            raise NoConvergence(
                f"Gradient norm {np.linalg.norm(grad):.3e} after {max_iter} iterations (||x|| = {np.linalg.norm(x):.3e})"
            )
        direction = _newton_direction(t, x, grad)
        value = t.potential(x)
        step = 1.0
        while True:
            candidate = x + step * direction
            if t.potential(candidate) < value:
                break
            step *= 0.5
            if step < MIN_STEP:
                raise NoConvergence(f"Line search failed at iteration {iterations}")
        x = candidate
        grad = t.gradient(x)
        iterations += 1

    if np.linalg.norm(x) > LARGE_MODE_NORM:
        logger.warning(f"Laplace mode at large norm {np.linalg.norm(x):.3e}")
    try:
        factor = cholesky(t.hessian(x))
    except NotPositiveDefinite as e:
        raise NonPdHessianAtMode(f"Hessian at the mode is not positive definite: {e}") from e

    logger.debug(f"Laplace mode found after {iterations} Newton iterations")
    return Gaussian(x, chol_inverse(factor))
