import numpy as np  # type: ignore
import pytest

from exceptions import DimensionMismatch, MalformedInput
from point_cloud import PointCloud
from projection import ProjectionRecord, RandomProjection, project, target_dim


class TestRandomProjection:
    def test_regenerated_from_record(self):
        projection = RandomProjection(10, 4, seed=3)
        again = RandomProjection.from_record(ProjectionRecord.from_dict(projection.record.to_dict()))
        np.testing.assert_array_equal(projection.matrix, again.matrix)

    def test_norm_preserved_on_average(self):
        x = np.random.default_rng(0).standard_normal(30)
        ratios = [np.sum(RandomProjection(30, 20, seed).apply(x) ** 2) / np.sum(x ** 2) for seed in range(400)]
        assert np.mean(ratios) == pytest.approx(1.0, abs=0.05)

    def test_identity(self):
        x = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(RandomProjection.identity(2).apply(x), x)
        assert RandomProjection.from_record(ProjectionRecord(None, 2, 2)).seed is None

    def test_seedless_must_be_identity(self):
        with pytest.raises(MalformedInput):
            RandomProjection.from_record(ProjectionRecord(None, 3, 2))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            RandomProjection(3, 2, seed=0).apply(np.zeros(4))

    def test_project_keeps_labels(self):
        cloud = PointCloud(np.ones((2, 5)), labels=["a", "b"])
        projected = project(RandomProjection(5, 3, seed=1), cloud)
        assert projected.dim == 3
        assert projected.labels == ["a", "b"]


class TestTargetDim:
    def test_curve_distortion(self):
        assert target_dim(1, 0.05, 0.5) == 128

    def test_separation_dim_reduces_fifty(self):
        assert target_dim(1, 0.5, 1.0) == 14
        assert target_dim(1, 0.05, 0.5) > 50

    def test_custom_constant(self):
        assert target_dim(2, 0.5, 1.0, c_jl=1.0) == 3

    @pytest.mark.parametrize("args", [(0, 0.1, 0.5), (1, 0.0, 0.5), (1, 0.1, 0.0), (1, 0.1, 1.5)])
    def test_rejects(self, args):
        with pytest.raises(MalformedInput):
            target_dim(*args)
