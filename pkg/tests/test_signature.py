import math

import numpy as np  # type: ignore
import pytest

from exceptions import DimensionMismatch, MalformedInput, NumericFailure
from manifolds import Circle, Segment, Sphere, Union, sample
from monomials import make_basis, polynomial_coefficients
from point_cloud import PointCloud
from signature import (
    FitConfig,
    MomentMatrix,
    fit,
    from_equations,
    membership_score,
    membership_scores,
    moment_matrix,
    null_signature,
    point_signature,
)


@pytest.fixture
def circle_sig():
    return fit(sample(Circle(), 50, seed=0), FitConfig(degree=2))


class TestMoment:
    def test_symmetric_psd(self):
        cloud = PointCloud(np.random.default_rng(0).standard_normal((30, 3)))
        moment = moment_matrix(cloud, make_basis(3, 2))
        np.testing.assert_array_equal(moment.entries, moment.entries.T)
        moment.check()

    def test_average_of_point_signatures(self):
        points = np.array([[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]])
        basis = make_basis(2, 2)
        expected = sum(point_signature(x, basis) for x in points) / 3
        np.testing.assert_allclose(moment_matrix(PointCloud(points), basis).entries, expected)

    def test_check_rejects_negative(self):
        basis = make_basis(1, 1)
        with pytest.raises(NumericFailure):
            MomentMatrix(np.diag([1.0, -1.0]), basis).check()

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            MomentMatrix(np.eye(2), make_basis(2, 1))

    def test_cloud_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            moment_matrix(PointCloud(np.zeros((3, 3))), make_basis(2, 1))


class TestNullSignature:
    def test_ranks(self):
        basis = make_basis(2, 1)
        null = null_signature(MomentMatrix(np.diag([1.0, 1e-3, 0.0]), basis), epsilon=1e-2)
        assert null.null_rank == 1
        assert null.eps_rank == 2
        np.testing.assert_allclose(null.singular_values, [1.0, 1e-3, 0.0])
        np.testing.assert_allclose(null.null_projector, np.diag([0.0, 0.0, 1.0]), atol=1e-12)

    def test_projectors_are_idempotent(self, circle_sig):
        for projector in (circle_sig.null_projector, circle_sig.eps_projector):
            np.testing.assert_allclose(projector @ projector, projector, atol=1e-8)
            np.testing.assert_allclose(projector, projector.T, atol=1e-12)

    def test_eps_contains_null(self, circle_sig):
        assert circle_sig.eps_rank >= circle_sig.null_rank
        np.testing.assert_allclose(
            circle_sig.eps_projector @ circle_sig.null_projector, circle_sig.null_projector, atol=1e-8
        )

    def test_negative_epsilon(self):
        basis = make_basis(1, 1)
        with pytest.raises(MalformedInput):
            null_signature(MomentMatrix(np.eye(2), basis), epsilon=-1.0)


class TestFit:
    def test_circle_equation(self, circle_sig):
        assert circle_sig.null_rank == 1
        target = np.array([-1.0, 0.0, 0.0, 1.0, 0.0, 1.0]) / math.sqrt(3.0)
        assert abs(circle_sig.null_vectors()[:, 0] @ target) == pytest.approx(1.0, abs=1e-9)

    def test_circle_membership(self, circle_sig):
        held_out = sample(Circle(), 100, seed=1)
        assert membership_scores(circle_sig, held_out.points).max() <= 1e-10
        assert membership_score(circle_sig, np.array([2.0, 0.0])) == pytest.approx(3.0, abs=1e-6)

    def test_arc_is_enough(self):
        sig = fit(sample(Circle(region=(0.0, math.pi / 4)), 50, seed=3), FitConfig(degree=2))
        assert sig.null_rank == 1
        assert membership_score(sig, np.array([0.0, -1.0])) <= 1e-10

    def test_vanishing_polynomial_contained(self):
        cross = Union([Segment((-1.0, 0.0), (1.0, 0.0)), Segment((0.0, -1.0), (0.0, 1.0))])
        sig = fit(sample(cross, 60, seed=4), FitConfig(degree=2))
        product = polynomial_coefficients(sig.basis, {(1, 1): 1.0})
        assert np.linalg.norm(sig.complement() @ product) <= 1e-8 * np.linalg.norm(product)

    def test_disjoint_arcs_agree(self):
        config = FitConfig(degree=2)
        a = fit(sample(Circle(region=(0.0, math.pi / 4)), 50, seed=5), config)
        b = fit(sample(Circle(region=(math.pi, 5 * math.pi / 4)), 50, seed=6), config)
        assert np.linalg.norm(a.null_projector - b.null_projector) <= 1e-6

    def test_memorizes_few_points(self):
        points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        sig = fit(PointCloud(points), FitConfig(degree=6))
        assert membership_scores(sig, points).max() <= 1e-9
        assert membership_score(sig, np.array([0.5, 0.5])) >= 1e-3

    def test_sphere_without_noise(self):
        sig = fit(sample(Sphere([0.0, 0.0, 0.0]), 80, seed=2), FitConfig(degree=2))
        assert sig.null_rank == 1
        assert membership_score(sig, np.array([0.0, 0.6, 0.8])) <= 1e-10

    def test_deterministic(self):
        cloud = sample(Circle(), 40, seed=5)
        a = fit(cloud, FitConfig(degree=2))
        b = fit(cloud, FitConfig(degree=2))
        np.testing.assert_array_equal(a.null_projector, b.null_projector)

    def test_projected_fit_scores_raw_points(self):
        cloud = sample(Circle(), 40, seed=6)
        lifted = PointCloud(np.hstack([cloud.points, np.zeros((cloud.size, 3))]))
        sig = fit(lifted, FitConfig(degree=2, projection_dim=2, seed=1))
        assert sig.input_dim == 5
        assert sig.basis.dim == 2
        assert membership_scores(sig, lifted.points).max() <= 1e-8

    def test_rejects_zero_degree(self):
        with pytest.raises(MalformedInput):
            fit(sample(Circle(), 10, seed=0), FitConfig(degree=0))

    def test_score_dimension_mismatch(self, circle_sig):
        with pytest.raises(DimensionMismatch):
            membership_score(circle_sig, np.zeros(3))


class TestFromEquations:
    def test_single_equation(self):
        basis = make_basis(2, 2)
        c = polynomial_coefficients(basis, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})
        sig = from_equations(basis, c)
        assert sig.null_rank == 1
        assert membership_score(sig, np.array([0.6, 0.8])) == pytest.approx(0.0, abs=1e-12)
        assert membership_score(sig, np.array([2.0, 0.0])) == pytest.approx(3.0)

    def test_rank_of_dependent_rows(self):
        basis = make_basis(2, 1)
        sig = from_equations(basis, [[0.0, 1.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
        assert sig.null_rank == 2
        np.testing.assert_allclose(sig.complement(), np.diag([1.0, 0.0, 0.0]), atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            from_equations(make_basis(2, 1), [1.0, 0.0])
