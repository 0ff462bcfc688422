import math

import numpy as np  # type: ignore
import pytest

from exceptions import DimensionMismatch, MalformedInput
from families import FlattenKind, MapMode
from hierarchy import (
    FlatSignature,
    Level2Config,
    cloud_moments,
    flat_cloud,
    flat_taylor_residual,
    flatten,
    flatten_matrix,
    hierarchy_score,
    implicit_residual,
    moment_rotation_map,
    moment_translation_map,
    reconstruct,
    rotation_grid,
    rotation_invariant_signature,
    rotation_score,
    side_from_triangle,
    signature_of_signatures,
    taylor_span_residual,
    trajectory_signature,
    triangle_size,
    velocity_signature,
)
from manifolds import Circle, Segment, rotate, sample, trajectory_cloud, translate
from point_cloud import PointCloud
from signature import FitConfig, fit

BASE = np.array([[1.0, 0.0], [0.2, 0.7], [-0.5, -0.4]])


@pytest.fixture(scope="module")
def circle_sigs():
    config = FitConfig(degree=2)
    return [fit(sample(Circle(radius=r), 30, seed=i), config) for i, r in enumerate(np.linspace(0.5, 2.0, 8))]


@pytest.fixture
def moments():
    return cloud_moments(PointCloud(np.random.default_rng(0).uniform(-1.0, 1.0, size=(50, 2))))


class TestFlatten:
    def test_triangle(self):
        assert triangle_size(6) == 21
        assert side_from_triangle(21) == 6
        with pytest.raises(MalformedInput):
            side_from_triangle(20)

    def test_plain_upper_triangle(self):
        np.testing.assert_array_equal(flatten_matrix(np.array([[1.0, 2.0], [2.0, 3.0]])), [1.0, 2.0, 3.0])

    def test_reconstruct(self, circle_sigs):
        sig = circle_sigs[0]
        np.testing.assert_allclose(reconstruct(flatten(sig)), sig.null_projector, atol=1e-14)

    def test_complement(self, circle_sigs):
        sig = circle_sigs[0]
        np.testing.assert_allclose(reconstruct(flatten(sig, FlattenKind.COMPLEMENT)), sig.complement())

    def test_wrong_length(self):
        with pytest.raises(MalformedInput):
            FlatSignature(np.zeros(5), 3)

    def test_flat_cloud_sorted(self, circle_sigs):
        rows = flat_cloud(circle_sigs[::-1]).points
        assert rows.shape == (8, 21)
        np.testing.assert_array_equal(rows, flat_cloud(circle_sigs).points)

    def test_flat_cloud_basis_mismatch(self, circle_sigs):
        other = fit(sample(Circle(), 30, seed=0), FitConfig(degree=3))
        with pytest.raises(MalformedInput):
            flat_cloud([circle_sigs[0], other])


class TestLevel2:
    def test_circle_of_any_radius(self, circle_sigs):
        concept = signature_of_signatures(circle_sigs, Level2Config())
        config = FitConfig(degree=2)
        circle = fit(sample(Circle(radius=1.37), 30, seed=100), config)
        line = fit(sample(Segment((-1.0, 0.3), (1.0, 0.3)), 30, seed=101), config)
        assert hierarchy_score(concept, circle, use_eps=False) <= 1e-6
        assert hierarchy_score(concept, line, use_eps=False) >= 1e-2

    def test_members_score_zero(self, circle_sigs):
        concept = signature_of_signatures(circle_sigs, Level2Config())
        assert max(hierarchy_score(concept, sig, use_eps=False) for sig in circle_sigs) <= 1e-8

    def test_scores_against_eps_by_default(self, circle_sigs):
        concept = signature_of_signatures(circle_sigs, Level2Config())
        line = fit(sample(Segment((-1.0, 0.3), (1.0, 0.3)), 30, seed=101), FitConfig(degree=2))
        assert hierarchy_score(concept, line) == pytest.approx(hierarchy_score(concept, line, use_eps=True))
        assert hierarchy_score(concept, line) >= hierarchy_score(concept, line, use_eps=False) - 1e-12

    def test_few_members_warn(self, circle_sigs, caplog):
        signature_of_signatures(circle_sigs[:2], Level2Config())
        assert "recommended" in caplog.text

    def test_rotation_invariant(self):
        concept = rotation_invariant_signature(PointCloud(BASE), rotation_grid())
        assert rotation_score(concept, PointCloud(rotate(BASE, 0.37)), use_eps=False) <= 1e-5

    def test_rotation_needs_angles(self):
        with pytest.raises(MalformedInput):
            rotation_invariant_signature(PointCloud(BASE), rotation_grid(4))


class TestMomentMaps:
    def test_rotation_exact(self, moments):
        cloud = PointCloud(np.random.default_rng(0).uniform(-1.0, 1.0, size=(50, 2)))
        for theta in (0.3, -1.2, 2.5):
            rotated = cloud_moments(cloud.with_points(rotate(cloud.points, theta)))
            np.testing.assert_allclose(moment_rotation_map(moments, theta), rotated, atol=1e-12)

    def test_taylor_close_for_small_angles(self, moments):
        for theta in (0.01, -0.05, 0.1):
            error = np.abs(moment_rotation_map(moments, theta, MapMode.TAYLOR) - moment_rotation_map(moments, theta))
            assert error.max() <= 2.0 * abs(theta) ** 3

    def test_span_residual(self, moments):
        residuals = taylor_span_residual(moments, [0.0, 0.01, 1.0])
        assert residuals[0] == pytest.approx(0.0, abs=1e-12)
        assert residuals[1] < residuals[2]

    def test_flats_near_taylor_span(self):
        line = sample(Segment((-1.0, 1.0), (1.0, 1.0)), 20, seed=0)
        residuals = flat_taylor_residual(line, np.linspace(-0.2, 0.2, 9), FitConfig(degree=1))
        assert residuals[4] == pytest.approx(0.0, abs=1e-9)
        assert residuals.max() <= 1e-2

    def test_flat_residual_is_cubic(self):
        line = sample(Segment((-1.0, 0.0), (1.0, 0.0)), 20, seed=0)
        small, large = flat_taylor_residual(line, [0.1, 0.2], FitConfig(degree=2, scaling="bombieri"))
        assert large > 1e-4
        assert small <= large / 4

    def test_translation(self, moments):
        cloud = PointCloud(np.random.default_rng(0).uniform(-1.0, 1.0, size=(50, 2)))
        shifted = cloud_moments(cloud.with_points(translate(cloud.points, 0.5, -0.2)))
        np.testing.assert_allclose(moment_translation_map(moments, 0.5, -0.2), shifted, atol=1e-12)
        linear = moment_translation_map(moments, 0.5, -0.2, MapMode.LINEAR)
        np.testing.assert_allclose(shifted - linear, [0.0, 0.0, 0.25, 0.04, -0.1], atol=1e-12)

    def test_translation_has_no_taylor(self, moments):
        with pytest.raises(MalformedInput):
            moment_translation_map(moments, 0.1, 0.1, MapMode.TAYLOR)

    def test_bad_moments(self):
        with pytest.raises(MalformedInput):
            moment_rotation_map([1.0, 2.0], 0.1)


class TestMotion:
    def test_velocity_concept(self):
        velocity = [[1.0, 0.5]]
        sigs = [trajectory_signature(c) for c in trajectory_cloud([(0.0, 0.0), (1.0, -1.0)], velocity, 6, 2.0)]
        concept = velocity_signature(sigs)
        assert concept.size - concept.null_rank == 1
        direction = np.array([1.0, 0.5, 0.0]) / math.sqrt(1.25)
        np.testing.assert_allclose(concept.complement(), np.outer(direction, direction), atol=1e-8)

    def test_needs_two(self):
        sig = trajectory_signature(trajectory_cloud([(0.0, 0.0)], [[1.0, 0.0]], 4)[0])
        with pytest.raises(MalformedInput):
            velocity_signature([sig])


class TestImplicitResidual:
    def test_circle_needs_degree_two(self):
        train, held_out = sample(Circle(), 40, seed=0).points, sample(Circle(), 20, seed=1).points
        assert implicit_residual(train, held_out, 1) > 0.1
        assert implicit_residual(train, held_out, 2) <= 1e-10

    def test_memorized_plane_grows(self):
        rng = np.random.default_rng(1)
        normal = np.ones(10) / math.sqrt(10.0)
        rows = rng.standard_normal((30, 10))
        rows += np.outer(0.5 - rows @ normal, normal)
        linear = implicit_residual(rows[:15], rows[15:], 1)
        assert linear <= 1e-10
        assert implicit_residual(rows[:15], rows[15:], 2) > max(linear, 1e-6)

    def test_held_out_dimension_checked(self, circle_sigs):
        flats = flat_cloud(circle_sigs).points
        with pytest.raises(DimensionMismatch):
            implicit_residual(flats, flats[:, :-1], 1)
