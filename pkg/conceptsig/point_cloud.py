from __future__ import annotations

from typing import List, Optional, Sequence

import numpy as np  # type: ignore

from exceptions import DimensionMismatch, MalformedInput


class PointCloud:
    """
    N x d sample of a concept, optionally labelled per point

    :param points: N x d array of finite coordinates
    :type points: np.ndarray
    :param labels: One label per row, defaults to None
    :type labels: Optional[Sequence[str]], optional
    """

    def __init__(self, points: np.ndarray, labels: Optional[Sequence[str]] = None):
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[None, :]
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise MalformedInput(f"point cloud must be a non-empty N x d array, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise MalformedInput("point cloud contains non-finite coordinates")
        if labels is not None and len(labels) != points.shape[0]:
            raise MalformedInput(f"{len(labels)} labels for {points.shape[0]} points")
        self.points = points
        self.labels: Optional[List[str]] = None if labels is None else [str(label) for label in labels]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        return np.array_equal(self.points, other.points) and self.labels == other.labels

    def __repr__(self) -> str:
        return f"PointCloud(size={self.size}, dim={self.dim})"

    def require_dim(self, dim: int) -> None:
        if self.dim != dim:
            raise DimensionMismatch(f"cloud has dimension {self.dim}, expected {dim}")

    def with_points(self, points: np.ndarray) -> PointCloud:
        """Same labels, new coordinates (rows must line up)"""
        return PointCloud(points, self.labels)

    def select(self, label: str) -> PointCloud:
        """The sub-cloud carrying the given label"""
        if self.labels is None:
            raise MalformedInput("cloud has no labels")
        rows = [i for i, value in enumerate(self.labels) if value == label]
        if not rows:
            raise MalformedInput(f"no points labelled {label!r}")
        return PointCloud(self.points[rows], [label] * len(rows))

    def rescaled_to_unit_ball(self) -> PointCloud:
        """Divide every coordinate by the largest point norm."""
        radius = float(np.max(np.linalg.norm(self.points, axis=1)))
        if radius == 0.0:
            return self
        return self.with_points(self.points / radius)

    @classmethod
    def concatenate(cls, clouds: Sequence[PointCloud]) -> PointCloud:
        if not clouds:
            raise MalformedInput("nothing to concatenate")
        points = np.vstack([cloud.points for cloud in clouds])
        if all(cloud.labels is not None for cloud in clouds):
            labels: Optional[List[str]] = [label for cloud in clouds for label in cloud.labels]
        else:
            labels = None
        return cls(points, labels)
