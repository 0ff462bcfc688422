import numpy as np  # type: ignore
import pytest

from exceptions import DimensionMismatch, Uncalibrated
from point_cloud import PointCloud
from random_mlp import (
    RandomMLP,
    calibrate,
    g1_hat,
    raw_moment,
    recover_from_expectations,
    recover_moment,
)
from wick import double_factorial, gaussian_moment, outer_form_expectation


class TestWick:
    def test_double_factorial(self):
        assert [double_factorial(n) for n in (-1, 0, 1, 3, 5, 6)] == [1, 1, 1, 3, 15, 48]

    def test_gaussian_moment(self):
        assert gaussian_moment([4]) == 3.0
        assert gaussian_moment([2, 2]) == 1.0
        assert gaussian_moment([6, 0]) == 15.0
        assert gaussian_moment([1, 3]) == 0.0

    def test_identity_form(self):
        # E[r r^T |r|^2] = (d + 2) I and E[r r^T |r|^4] = (d + 2)(d + 4) I
        np.testing.assert_allclose(outer_form_expectation(np.ones(3), 1), 5.0 * np.eye(3))
        np.testing.assert_allclose(outer_form_expectation(np.ones(2), 2), 24.0 * np.eye(2))

    def test_power_zero(self):
        np.testing.assert_allclose(outer_form_expectation([2.0, 3.0], 0), np.eye(2))

    def test_linear_in_diagonal(self):
        # E[r r^T r^T A r] = tr(A) I + 2A
        a = np.array([0.5, 1.0, 2.0])
        np.testing.assert_allclose(outer_form_expectation(a, 1), np.diag(a.sum() + 2 * a))


class TestCalibration:
    def test_residuals_small(self):
        calibration = calibrate(3)
        assert max(calibration.residuals) <= 1e-6

    def test_recovers_exact_moments(self):
        calibration = calibrate(3)
        a = np.array([0.7, 1.3, 1.9])
        moment, squared = recover_from_expectations(
            calibration, outer_form_expectation(a, 1), outer_form_expectation(a, 2)
        )
        np.testing.assert_allclose(moment, np.diag(a), rtol=1e-6, atol=1e-6)
        np.testing.assert_allclose(squared, np.diag(a ** 2), rtol=1e-6, atol=1e-6)


class TestRandomMLP:
    def test_g1_is_quadratic_form(self):
        cloud = PointCloud(np.random.default_rng(0).standard_normal((40, 3)))
        net = RandomMLP(3, 50, seed=1)
        moment = raw_moment(cloud)
        expected = np.einsum("ij,jk,ik->i", net.weights, moment, net.weights)
        np.testing.assert_allclose(g1_hat(net, cloud), expected)

    def test_uncalibrated(self):
        with pytest.raises(Uncalibrated):
            recover_moment(RandomMLP(2, 10), PointCloud(np.ones((3, 2))))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            g1_hat(RandomMLP(2, 10), PointCloud(np.ones((3, 4))))

    def test_recover_moment(self):
        cloud = PointCloud(np.random.default_rng(2).standard_normal((200, 3)))
        moment = raw_moment(cloud)
        net = RandomMLP(3, 200000, seed=3)
        net.calibrate()
        error = np.linalg.norm(recover_moment(net, cloud) - moment) / np.linalg.norm(moment)
        assert error <= 0.1

    def test_same_seed_same_weights(self):
        np.testing.assert_array_equal(RandomMLP(4, 20, seed=9).weights, RandomMLP(4, 20, seed=9).weights)


class TestCalibrationExamples:
    def test_one_dimension(self):
        calibration = calibrate(1)
        # E[r^4] = 3 and E[r^6] = 15 for M = 1
        moment, squared = recover_from_expectations(calibration, np.array([[3.0]]), np.array([[15.0]]))
        np.testing.assert_allclose(moment, [[1.0]], atol=1e-8)
        np.testing.assert_allclose(squared, [[1.0]], atol=1e-8)

    def test_two_dimensions(self):
        moment, _ = recover_from_expectations(calibrate(2), outer_form_expectation([2.0, 1.0], 1))
        np.testing.assert_allclose(moment, np.diag([2.0, 1.0]), atol=1e-8)

    def test_independent_of_test_matrices(self):
        first = calibrate(3, seed=0)
        second = calibrate(3, seed=5)
        np.testing.assert_allclose(first.moment, second.moment, atol=1e-8)
        np.testing.assert_allclose(first.moment_squared, second.moment_squared, atol=1e-8)

    def test_zero_cloud(self):
        net = RandomMLP(2, 100, seed=0)
        net.calibrate()
        np.testing.assert_array_equal(recover_moment(net, PointCloud(np.zeros((4, 2)))), np.zeros((2, 2)))
