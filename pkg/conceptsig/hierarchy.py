"""
Signatures of signatures.

A level-1 signature is flattened (upper triangle of a projector, row by
row) into a vector; a family of related concepts then becomes a point
cloud in flat space, and fitting that cloud gives a level-2 concept such as
"a circle of any radius" or "this object at any rotation".
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np  # type: ignore
import scipy.linalg  # type: ignore

import tolerances
from algebra import intersect
from exceptions import MalformedInput
from families import FlattenKind, MapMode, TransformFamily
from manifolds import transform_family
from monomials import make_basis, sample_size_bound
from point_cloud import PointCloud
from projection import ProjectionRecord, RandomProjection
from signature import FitConfig, Signature, fit, membership_score, moment_matrix

logger = logging.getLogger(__name__)


@dataclass
class FlatSignature:
    """Upper triangle (diagonal included) of a signature's projector"""
    vector: np.ndarray
    size: int
    source: str = ""
    kind: FlattenKind = FlattenKind.NULL
    projection: Optional[ProjectionRecord] = None

    def __post_init__(self):
        if self.vector.shape != (triangle_size(self.size),):
            raise MalformedInput(f"flat of length {self.vector.size} does not match size {self.size}")


def triangle_size(m: int) -> int:
    return m * (m + 1) // 2


def side_from_triangle(length: int) -> int:
    """Inverse of :func:`triangle_size`"""
    m = int(round((math.sqrt(8 * length + 1) - 1) / 2))
    if triangle_size(m) != length:
        raise MalformedInput(f"{length} is not a triangular number")
    return m


def flatten_matrix(matrix: np.ndarray) -> np.ndarray:
    rows, cols = np.triu_indices(matrix.shape[0])
    return matrix[rows, cols].copy()


def reconstruct(flat: FlatSignature) -> np.ndarray:
    """
    Symmetric matrix whose upper triangle is the flat

    :param flat: Flattened signature
    :type flat: FlatSignature
    :return: m x m symmetric matrix
    :rtype: np.ndarray
    """
    matrix = np.zeros((flat.size, flat.size))
    rows, cols = np.triu_indices(flat.size)
    matrix[rows, cols] = flat.vector
    matrix[cols, rows] = flat.vector
    return matrix


def flatten(sig: Signature, kind: FlattenKind = FlattenKind.NULL, use_eps: bool = False) -> FlatSignature:
    """
    Flatten T (or its complement F) of a signature

    :param sig: Signature to flatten
    :type sig: Signature
    :param kind: Read T or F = I - T, defaults to FlattenKind.NULL
    :type kind: FlattenKind, optional
    :param use_eps: Read T_eps instead of T, defaults to False
    :type use_eps: bool, optional
    :return: The flat
    :rtype: FlatSignature
    """
    kind = FlattenKind(kind)
    projector = sig.projector(use_eps)
    if kind is FlattenKind.COMPLEMENT:
        projector = np.eye(sig.size) - projector
    return FlatSignature(flatten_matrix(projector), sig.size, sig.source, kind, sig.projection)


@dataclass
class Level2Config:
    """How a family of level-1 signatures is fit"""
    degree: int = 2
    epsilon: float = tolerances.level2_epsilon
    projection_dim: Optional[int] = tolerances.level2_projection_dim
    seed: int = 0
    include_constant: bool = True
    kind: FlattenKind = FlattenKind.NULL
    # Latent dimension and generator degree of the family, used for the
    # recommended number of member signatures.
    latent_dim: int = 1
    generator_degree: int = 2


def _sorted_rows(rows: np.ndarray) -> np.ndarray:
    order = np.lexsort(rows.T[::-1])
    return rows[order]


def flat_cloud(sigs: Sequence[Signature], kind: FlattenKind = FlattenKind.NULL) -> PointCloud:
    """Flats of the signatures as a point cloud, rows in lexicographic order"""
    if not sigs:
        raise MalformedInput("no signatures given")
    for sig in sigs[1:]:
        if sig.basis != sigs[0].basis:
            raise MalformedInput("signatures of one family must share a basis")
    rows = np.array([flatten(sig, kind).vector for sig in sigs])
    return PointCloud(_sorted_rows(rows))


def signature_of_signatures(sigs: Sequence[Signature], config: Optional[Level2Config] = None) -> Signature:
    """
    Level-2 concept of a family of level-1 signatures.

    :param sigs: Member signatures on a common basis
    :type sigs: Sequence[Signature]
    :param config: Level-2 degree, epsilon and projection, defaults to Level2Config()
    :type config: Optional[Level2Config], optional
    :return: Signature over flat space
    :rtype: Signature
    """
    config = config or Level2Config()
    cloud = flat_cloud(sigs, config.kind)
    recommended = sample_size_bound(config.latent_dim, config.generator_degree, config.degree)
    if cloud.size < recommended:
        logger.warning("%d signatures given, %d recommended for this family", cloud.size, recommended)

    projection_dim = config.projection_dim
    if projection_dim is not None and projection_dim >= cloud.dim:
        logger.info("flats have dimension %d <= %d, not projecting", cloud.dim, projection_dim)
        projection_dim = None

    concept = fit(
        cloud,
        FitConfig(
            degree=config.degree,
            epsilon=config.epsilon,
            include_constant=config.include_constant,
            projection_dim=projection_dim,
            seed=config.seed,
        ),
    )
    concept.source = "level2"
    return concept


def hierarchy_score(
    concept: Signature,
    sig: Signature,
    kind: FlattenKind = FlattenKind.NULL,
    use_eps: bool = True,
) -> float:
    """Level-2 membership of a candidate level-1 signature, against T_eps unless use_eps is False"""
    return membership_score(concept, flatten(sig, kind).vector, use_eps=use_eps)


def moment_taylor_terms(moments: Sequence[float]) -> np.ndarray:
    """
    Rows a0, a1, a2 of the expansion a0 + theta a1 + theta^2/2 a2 of the
    rotated moments (M_x, M_y, M_xx, M_yy, M_xy)
    """
    mx, my, mxx, myy, mxy = _moments(moments)
    a0 = np.array([mx, my, mxx, myy, mxy])
    a1 = np.array([my, -mx, 2 * mxy, -2 * mxy, myy - mxx])
    a2 = np.array([-mx, -my, 2 * (myy - mxx), 2 * (mxx - myy), -4 * mxy])
    return np.vstack([a0, a1, a2])


def _moments(moments: Sequence[float]) -> np.ndarray:
    moments = np.asarray(moments, dtype=float)
    if moments.shape != (5,):
        raise MalformedInput(f"expected (M_x, M_y, M_xx, M_yy, M_xy), got shape {moments.shape}")
    return moments


def cloud_moments(cloud: PointCloud) -> np.ndarray:
    """(M_x, M_y, M_xx, M_yy, M_xy) of the first two columns"""
    x, y = cloud.points[:, 0], cloud.points[:, 1]
    return np.array([x.mean(), y.mean(), (x * x).mean(), (y * y).mean(), (x * y).mean()])


def moment_rotation_map(moments: Sequence[float], theta: float, mode: MapMode = MapMode.EXACT) -> np.ndarray:
    """
    Moments of the cloud rotated by theta (x' = x cos + y sin, y' = -x sin + y cos)

    :param moments: (M_x, M_y, M_xx, M_yy, M_xy)
    :type moments: Sequence[float]
    :param theta: Angle
    :type theta: float
    :param mode: EXACT trigonometric map or the order-2 TAYLOR expansion
    :type mode: MapMode, optional
    :return: Rotated moments
    :rtype: np.ndarray
    """
    mode = MapMode(mode)
    if mode is MapMode.TAYLOR:
        a0, a1, a2 = moment_taylor_terms(moments)
        return a0 + theta * a1 + theta ** 2 / 2.0 * a2
    if mode is not MapMode.EXACT:
        raise MalformedInput(f"rotation map has no {mode.value} mode")
    mx, my, mxx, myy, mxy = _moments(moments)
    c, s = math.cos(theta), math.sin(theta)
    return np.array([
        mx * c + my * s,
        -mx * s + my * c,
        mxx * c * c + 2 * mxy * c * s + myy * s * s,
        mxx * s * s - 2 * mxy * c * s + myy * c * c,
        (myy - mxx) * c * s + mxy * (c * c - s * s),
    ])


def moment_translation_map(
    moments: Sequence[float], u: float, v: float, mode: MapMode = MapMode.EXACT
) -> np.ndarray:
    """
    Moments of the cloud shifted by (u, v). LINEAR mode drops the u^2, v^2
    and uv terms.
    """
    mode = MapMode(mode)
    if mode not in (MapMode.EXACT, MapMode.LINEAR):
        raise MalformedInput(f"translation map has no {mode.value} mode")
    mx, my, mxx, myy, mxy = _moments(moments)
    shifted = np.array([
        mx + u,
        my + v,
        mxx + 2 * u * mx,
        myy + 2 * v * my,
        mxy + u * my + v * mx,
    ])
    if mode is MapMode.EXACT:
        shifted += np.array([0.0, 0.0, u * u, v * v, u * v])
    return shifted


def taylor_span_residual(moments: Sequence[float], thetas: Sequence[float]) -> np.ndarray:
    """
    Distance of each rotated moment vector from the affine span
    a0 + span{a1, a2}
    """
    a0, a1, a2 = moment_taylor_terms(moments)
    span, _ = np.linalg.qr(np.column_stack([a1, a2]))
    residuals = []
    for theta in thetas:
        offset = moment_rotation_map(moments, float(theta)) - a0
        residuals.append(float(np.linalg.norm(offset - span @ (span.T @ offset))))
    return np.array(residuals)


def flat_taylor_residual(
    base: PointCloud,
    thetas: Sequence[float],
    config: FitConfig,
    step: float = 1e-3,
) -> np.ndarray:
    """
    Distance of the flat of each rotated copy of base from a0 + span{a1, a2},
    the order-2 Taylor form of the flats around theta = 0. The Taylor terms
    come from central differences with the given step.

    :param base: Cloud whose first two columns are positions
    :type base: PointCloud
    :param thetas: Angles to measure at
    :type thetas: Sequence[float]
    :param config: Level-1 fit of every rotated copy
    :type config: FitConfig
    :param step: Difference step, defaults to 1e-3
    :type step: float, optional
    :return: One distance per angle
    :rtype: np.ndarray
    """
    def flats(angles: Sequence[float]) -> np.ndarray:
        clouds = transform_family(base, TransformFamily.ROTATION, angles)
        return np.array([flatten(fit(cloud, config)).vector for cloud in clouds])

    minus, a0, plus = flats([-step, 0.0, step])
    a1 = (plus - minus) / (2.0 * step)
    a2 = (plus - 2.0 * a0 + minus) / step ** 2
    span, _ = np.linalg.qr(np.column_stack([a1, a2]))
    offsets = flats(thetas) - a0
    return np.linalg.norm(offsets - (offsets @ span) @ span.T, axis=1)


@dataclass
class RotationConfig:
    """Level-1 fit of each rotated cloud and the level-2 fit of the family"""
    degree: int = 2
    scaling: str = "bombieri"
    level2: Level2Config = field(default_factory=Level2Config)

    def level1(self) -> FitConfig:
        return FitConfig(degree=self.degree, scaling=self.scaling)


def rotation_signatures(base: PointCloud, thetas: Sequence[float], config: RotationConfig) -> List[Signature]:
    """Level-1 signature of every rotated copy of base"""
    return [fit(cloud, config.level1()) for cloud in transform_family(base, TransformFamily.ROTATION, thetas)]


def rotation_invariant_signature(
    base: PointCloud,
    thetas: Sequence[float],
    config: Optional[RotationConfig] = None,
) -> Signature:
    """
    Concept of "base under any rotation"

    :param base: Cloud whose first two columns are positions
    :type base: PointCloud
    :param thetas: Grid of at least 8 angles
    :type thetas: Sequence[float]
    :param config: Fit settings, defaults to RotationConfig()
    :type config: Optional[RotationConfig], optional
    :return: Level-2 signature
    :rtype: Signature
    """
    if len(thetas) < 8:
        raise MalformedInput(f"need at least 8 angles, got {len(thetas)}")
    config = config or RotationConfig()
    return signature_of_signatures(rotation_signatures(base, thetas, config), config.level2)


def rotation_score(
    concept: Signature, cloud: PointCloud, config: Optional[RotationConfig] = None, use_eps: bool = True
) -> float:
    """Level-2 membership of a cloud, fit the same way as the family members"""
    config = config or RotationConfig()
    return hierarchy_score(concept, fit(cloud, config.level1()), config.level2.kind, use_eps)


def rotation_grid(count: int = 24) -> np.ndarray:
    return np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)


def trajectory_signature(cloud: PointCloud) -> Signature:
    """Degree-1 homogeneous fit of a 1-appended trajectory: F spans its affine flat"""
    return fit(cloud, FitConfig(degree=1, include_constant=False))


def velocity_signature(sigs: Sequence[Signature]) -> Signature:
    """
    Velocity concept shared by a group of trajectory signatures

    :param sigs: At least two trajectory signatures
    :type sigs: Sequence[Signature]
    :return: Intersection of all of them
    :rtype: Signature
    """
    if len(sigs) < 2:
        raise MalformedInput("a velocity concept needs at least two trajectories")
    velocity = functools.reduce(intersect, sigs)
    velocity.source = "velocity"
    return velocity


def implicit_residual(
    flats: np.ndarray,
    held_out: np.ndarray,
    degree: int,
    projection_dim: Optional[int] = None,
    seed: int = 0,
) -> float:
    """
    Largest squared value, over held-out members of a family, of the best
    unit-norm polynomial of the given degree fit on the training flats (the
    eigenvector of the smallest eigenvalue of their moment matrix).
    Small when some polynomial of that degree nearly vanishes on the whole
    family; large when the fit only memorized the training flats.

    :param flats: Training flats, one per row
    :type flats: np.ndarray
    :param held_out: Flats of other members of the same family
    :type held_out: np.ndarray
    :param degree: Level-2 degree
    :type degree: int
    :param projection_dim: Project flats first when smaller than their dimension, defaults to None
    :type projection_dim: Optional[int], optional
    :param seed: Seed of the projection, defaults to 0
    :type seed: int, optional
    :return: Sup of the best polynomial's square on the held-out flats
    :rtype: float
    """
    cloud = PointCloud(np.asarray(flats, dtype=float))
    held_out = np.atleast_2d(np.asarray(held_out, dtype=float))
    cloud.require_dim(held_out.shape[1])
    if projection_dim is not None and projection_dim < cloud.dim:
        projection = RandomProjection(cloud.dim, projection_dim, seed)
        cloud = cloud.with_points(projection.apply(cloud.points))
        held_out = projection.apply(held_out)
    basis = make_basis(cloud.dim, degree)
    _, eigenvectors = scipy.linalg.eigh(moment_matrix(cloud, basis).entries)
    values = basis.embed_many(held_out) @ eigenvectors[:, 0]
    return float(np.max(values ** 2))
