"""
Random Gaussian linear maps used to shrink points (and flattened
signatures) before they are embedded. A projection is stored by its seed
and dimensions only; the matrix is regenerated on load.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np  # type: ignore

import tolerances
from exceptions import DimensionMismatch, MalformedInput
from point_cloud import PointCloud


@dataclass(frozen=True)
class ProjectionRecord:
    """What a signature remembers about the projection it was fit under"""
    seed: Optional[int]
    in_dim: int
    out_dim: int

    def to_dict(self) -> Dict[str, Optional[int]]:
        return {"seed": self.seed, "in_dim": self.in_dim, "out_dim": self.out_dim}

    @classmethod
    def from_dict(cls, data: Dict[str, Optional[int]]) -> ProjectionRecord:
        try:
            seed = data["seed"]
            return cls(None if seed is None else int(seed), int(data["in_dim"]), int(data["out_dim"]))
        except KeyError as exc:
            raise MalformedInput(f"missing field {exc.args[0]!r}", source="projection")


class RandomProjection:
    """
    m x d matrix with i.i.d. N(0, 1/m) entries, so E|Ax|^2 = |x|^2

    :param in_dim: Input dimension d
    :type in_dim: int
    :param out_dim: Output dimension m
    :type out_dim: int
    :param seed: Seed for numpy.random.default_rng
    :type seed: int
    """

    def __init__(self, in_dim: int, out_dim: int, seed: int):
        if in_dim < 1 or out_dim < 1:
            raise MalformedInput(f"projection dimensions must be positive, got {in_dim} -> {out_dim}")
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.seed: Optional[int] = seed
        rng = np.random.default_rng(seed)
        self.matrix = rng.standard_normal((out_dim, in_dim)) / math.sqrt(out_dim)

    @classmethod
    def identity(cls, dim: int) -> RandomProjection:
        """Identity map, for tests that need a projection that changes nothing."""
        projection = cls.__new__(cls)
        projection.in_dim = dim
        projection.out_dim = dim
        projection.seed = None
        projection.matrix = np.eye(dim)
        return projection

    @classmethod
    def from_record(cls, record: ProjectionRecord) -> RandomProjection:
        if record.seed is None:
            if record.in_dim != record.out_dim:
                raise MalformedInput("a seedless projection must be the identity", source="projection")
            return cls.identity(record.in_dim)
        return cls(record.in_dim, record.out_dim, record.seed)

    @property
    def record(self) -> ProjectionRecord:
        return ProjectionRecord(self.seed, self.in_dim, self.out_dim)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Map a single point or the rows of a matrix"""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.in_dim:
            raise DimensionMismatch(f"input has dimension {x.shape[-1]}, projection expects {self.in_dim}")
        return x @ self.matrix.T


def project(projection: RandomProjection, cloud: PointCloud) -> PointCloud:
    """Map every point of the cloud, keeping labels"""
    cloud.require_dim(projection.in_dim)
    return cloud.with_points(projection.apply(cloud.points))


def target_dim(k: int, delta: float, epsilon: float, c_jl: Optional[float] = None) -> int:
    """
    Output dimension ceil(c_jl * (k + ln(1/delta)) / epsilon^2) that keeps
    distances on a k-dimensional manifold within (1 +- epsilon) with
    probability 1 - delta.

    :param k: Latent dimension
    :type k: int
    :param delta: Failure probability, in (0, 1)
    :type delta: float
    :param epsilon: Distortion, in (0, 1]
    :type epsilon: float
    :param c_jl: Constant in front, defaults to tolerances.c_jl
    :type c_jl: Optional[float], optional
    :return: Output dimension m
    :rtype: int
    """
    if k < 1 or not 0.0 < delta < 1.0 or not 0.0 < epsilon <= 1.0:
        raise MalformedInput(f"need k >= 1, 0 < delta < 1, 0 < epsilon <= 1, got ({k}, {delta}, {epsilon})")
    c_jl = tolerances.c_jl if c_jl is None else c_jl
    return math.ceil(c_jl * (k + math.log(1.0 / delta)) / epsilon ** 2)
