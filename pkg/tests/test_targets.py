#!/usr/bin/env python3
"""
Target Tests
Tests potentials, gradients and Hessians of the Gaussian, Student-t and logistic targets
"""

import math
import shutil
import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np

# Add engine to path
sys.path.insert(0, str(Path(__file__).parent.parent / "engine"))

from geometry.exceptions import DimensionMismatch
from geometry.linalg import symmetrize
from geometry.rng import RngState
from inference.targets import (
    LogRegData,
    check_derivatives,
    gaussian_target,
    generate_logreg_data,
    logreg_target,
    random_gaussian_target,
    random_student_t_target,
    student_t_target,
)

GRADIENT_TOL = 1e-5
HESSIAN_TOL = 1e-4


class TestGaussianTarget(unittest.TestCase):
    """Test gaussian_target"""

    def setUp(self):
        self.target = random_gaussian_target(5, RngState(11, key=(5,)))

    def test_gradient_zero_at_mode(self):
        np.testing.assert_allclose(self.target.gradient(self.target.center), np.zeros(5), atol=1e-14)

    def test_identity_covariance(self):
        m = np.array([1.0, -2.0])
        t = gaussian_target(m, np.eye(2))
        x = np.array([0.5, 0.5])
        self.assertAlmostEqual(t.potential(x), 0.5 * float(np.sum((x - m) ** 2)), places=14)
        np.testing.assert_allclose(t.hessian(x), np.eye(2))

    def test_metadata(self):
        eig = np.linalg.eigvalsh(np.linalg.inv(self.target.distribution.cov))
        self.assertAlmostEqual(self.target.alpha, eig[0], places=10)
        self.assertAlmostEqual(self.target.beta, eig[-1], places=10)
        self.assertEqual(self.target.ell, 0.0)
        self.assertIs(self.target.optimum, self.target.distribution)
        self.assertTrue(self.target.metadata()["has_optimum"])

    def test_constant_hessian_trace(self):
        X = np.random.default_rng(0).standard_normal((4, 5))
        traces = self.target.hessian_trace_batch(X)
        np.testing.assert_allclose(traces, np.trace(self.target.precision))
        np.testing.assert_allclose(self.target.hessian(X[0]), self.target.hessian(X[1]))

    def test_finite_differences(self):
        grad_err, hess_err = check_derivatives(self.target, RngState(1), n_points=20)
        self.assertLess(grad_err, GRADIENT_TOL)
        self.assertLess(hess_err, HESSIAN_TOL)

    def test_generator(self):
        """Deterministic under seed, covariance floor respected"""
        again = random_gaussian_target(5, RngState(11, key=(5,)))
        np.testing.assert_array_equal(again.distribution.cov, self.target.distribution.cov)
        np.testing.assert_array_equal(again.distribution.mean, self.target.distribution.mean)
        self.assertGreaterEqual(float(np.linalg.eigvalsh(self.target.distribution.cov)[0]), 20.0 - 1e-9)
        self.assertTrue(np.all(np.abs(self.target.center) <= 2.0))

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            self.target.gradient(np.zeros(3))


class TestStudentTTarget(unittest.TestCase):
    """Test student_t_target"""

    def test_one_dimensional_value(self):
        t = student_t_target(np.zeros(1), np.eye(1), 4.0)
        self.assertAlmostEqual(t.potential(np.array([2.0])), 2.5 * math.log(2.0), places=12)

    def test_gradient_zero_at_location(self):
        t = random_student_t_target(4, RngState(23, key=(4,)))
        np.testing.assert_allclose(t.gradient(t.center), np.zeros(4), atol=1e-14)

    def test_hessian_at_location(self):
        """Hessian at the location is (nu + d)/nu * Sigma^{-1}"""
        t = random_student_t_target(3, RngState(23, key=(3,)), nu=4.0)
        np.testing.assert_allclose(t.hessian(t.center), (7.0 / 4.0) * t.precision, rtol=1e-12)

    def test_not_convex_in_tails(self):
        t = student_t_target(np.zeros(3), np.eye(3), 4.0)
        x = np.array([10.0, 0.0, 0.0])
        self.assertLess(float(np.linalg.eigvalsh(t.hessian(x))[0]), 0.0)
        self.assertIsNone(t.alpha)
        self.assertIsNone(t.optimum)

    def test_hessian_trace_matches_hessian(self):
        t = random_student_t_target(4, RngState(5, key=(4,)))
        X = t.center + 3.0 * np.random.default_rng(1).standard_normal((6, 4))
        np.testing.assert_allclose(t.hessian_trace_batch(X), np.trace(t.hessian_batch(X), axis1=1, axis2=2), rtol=1e-10)

    def test_finite_differences(self):
        t = random_student_t_target(5, RngState(23, key=(5,)))
        grad_err, hess_err = check_derivatives(t, RngState(2), n_points=20, spread=5.0)
        self.assertLess(grad_err, GRADIENT_TOL)
        self.assertLess(hess_err, HESSIAN_TOL)

    def test_invalid_nu(self):
        with self.assertRaises(ValueError):
            student_t_target(np.zeros(2), np.eye(2), 0.0)


class TestLogRegTarget(unittest.TestCase):
    """Test logreg_target and generate_logreg_data"""

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()
        self.data = generate_logreg_data(50, 3, RngState(37))
        self.target = logreg_target(self.data)

    def tearDown(self):
        shutil.rmtree(self.test_dir, ignore_errors=True)

    def test_values_at_zero(self):
        theta = np.zeros(3)
        self.assertAlmostEqual(self.target.potential(theta), 50 * math.log(2.0), places=10)
        expected = (0.5 - self.data.Y) @ self.data.X
        np.testing.assert_allclose(self.target.gradient(theta), expected, atol=1e-12)

    def test_metadata(self):
        self.assertEqual(self.target.alpha, 0.0)
        gram = self.data.X.T @ self.data.X
        self.assertAlmostEqual(self.target.beta, 0.25 * float(np.linalg.eigvalsh(gram)[-1]), places=8)

    def test_hessian_psd(self):
        thetas = 2.0 * np.random.default_rng(3).standard_normal((10, 3))
        for H in self.target.hessian_batch(thetas):
            self.assertGreaterEqual(float(np.linalg.eigvalsh(symmetrize(H))[0]), -1e-10)

    def test_finite_differences(self):
        grad_err, hess_err = check_derivatives(self.target, RngState(3), n_points=20)
        self.assertLess(grad_err, GRADIENT_TOL)
        self.assertLess(hess_err, HESSIAN_TOL)

    def test_generation_determinism(self):
        a = generate_logreg_data(1000, 200, RngState(37))
        b = generate_logreg_data(1000, 200, RngState(37))
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.Y, b.Y)
        self.assertTrue(0.2 < a.Y.mean() < 0.8)

    def test_single_row(self):
        data = generate_logreg_data(1, 4, RngState(1))
        self.assertEqual(data.X.shape, (1, 4))
        self.assertIn(float(data.Y[0]), (0.0, 1.0))

    def test_csv_round_trip(self):
        path = Path(self.test_dir) / "data.csv"
        self.data.to_csv(path)
        loaded = LogRegData.from_csv(path)
        np.testing.assert_array_equal(loaded.X, self.data.X)
        np.testing.assert_array_equal(loaded.Y, self.data.Y)

    def test_invalid_labels(self):
        with self.assertRaises(ValueError):
            LogRegData(X=np.ones((2, 2)), Y=np.array([0.0, 0.5]))


if __name__ == '__main__':
    unittest.main()
