"""
Moment and null-space signatures of point clouds.

The moment matrix M = (1/N) sum phi(x_i) phi(x_i)^T is decomposed with a
symmetric eigensolver. Eigenvectors whose eigenvalue counts as zero span
the degree <= l polynomials vanishing on the sample; T projects onto them.
A point x lies on the sampled manifold iff phi(x)^T T phi(x) = 0.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np  # type: ignore
import scipy.linalg  # type: ignore

import tolerances
from exceptions import DimensionMismatch, MalformedInput, NumericFailure
from monomials import MonomialBasis, make_basis
from point_cloud import PointCloud
from projection import ProjectionRecord, RandomProjection, project

logger = logging.getLogger(__name__)


class MomentMatrix:
    """
    Symmetric PSD m x m moment matrix tied to the basis it was built on

    :param entries: m x m matrix
    :type entries: np.ndarray
    :param basis: Basis of the feature map
    :type basis: MonomialBasis
    """

    def __init__(self, entries: np.ndarray, basis: MonomialBasis):
        entries = np.asarray(entries, dtype=float)
        if entries.shape != (basis.size, basis.size):
            raise DimensionMismatch(f"moment matrix of shape {entries.shape} for a basis of size {basis.size}")
        self.entries = entries
        self.basis = basis

    def check(self) -> None:
        """Raise NumericFailure if symmetry or positive semidefiniteness is violated"""
        scale = max(float(np.abs(self.entries).max()), 1.0)
        if np.abs(self.entries - self.entries.T).max() > tolerances.symmetry_tol * scale:
            raise NumericFailure("moment matrix is not symmetric")
        eigenvalues = scipy.linalg.eigvalsh(self.entries)
        if eigenvalues[0] < -tolerances.psd_tol * max(eigenvalues[-1], 1.0):
            raise NumericFailure(f"moment matrix is not PSD, smallest eigenvalue {eigenvalues[0]:.3e}")


class NullSpace(NamedTuple):
    null_projector: np.ndarray
    eps_projector: np.ndarray
    null_rank: int
    eps_rank: int
    singular_values: np.ndarray


@dataclass(eq=False)
class Signature:
    """
    Signature of one concept. T and T_eps are orthogonal projectors onto the
    exact and approximate null spaces of the moment matrix.
    """
    basis: MonomialBasis
    moment: Optional[MomentMatrix]
    singular_values: np.ndarray
    null_projector: np.ndarray
    eps_projector: np.ndarray
    epsilon: float
    null_rank: int
    eps_rank: int
    projection: Optional[ProjectionRecord] = None
    # Free-form provenance, e.g. the source file or the experiment label.
    source: str = field(default="", compare=False)

    @property
    def size(self) -> int:
        return self.basis.size

    @property
    def input_dim(self) -> int:
        """Dimension of points before any projection"""
        return self.projection.in_dim if self.projection else self.basis.dim

    def complement(self) -> np.ndarray:
        return np.eye(self.size) - self.null_projector

    def projector(self, use_eps: bool = False) -> np.ndarray:
        return self.eps_projector if use_eps else self.null_projector

    def null_vectors(self) -> np.ndarray:
        """Orthonormal basis (columns) of range(T)"""
        if self.null_rank == 0:
            return np.zeros((self.size, 0))
        eigenvalues, eigenvectors = scipy.linalg.eigh(self.null_projector)
        return eigenvectors[:, -self.null_rank:]


def moment_matrix(cloud: PointCloud, basis: MonomialBasis) -> MomentMatrix:
    """
    Average feature outer product of the cloud.

    :param cloud: Sample points
    :type cloud: PointCloud
    :param basis: Feature map basis
    :type basis: MonomialBasis
    :raises DimensionMismatch: When the cloud and basis disagree on d
    :return: The moment matrix
    :rtype: MomentMatrix
    """
    cloud.require_dim(basis.dim)
    features = basis.embed_many(cloud.points)
    entries = features.T @ features / cloud.size
    return MomentMatrix((entries + entries.T) / 2.0, basis)


def point_signature(x: np.ndarray, basis: MonomialBasis) -> np.ndarray:
    """S(x) = phi(x) phi(x)^T"""
    features = basis.embed(x)
    return np.outer(features, features)


def null_signature(moment: MomentMatrix, epsilon: Optional[float] = None) -> NullSpace:
    """
    Split the spectrum of M into exact and epsilon-approximate null spaces.
    An eigenvalue is zero when it is at most max(zero_tol_abs, zero_tol_rel * largest).

    :param moment: Symmetric PSD moment matrix
    :type moment: MomentMatrix
    :param epsilon: Threshold for T_eps, defaults to tolerances.default_epsilon
    :type epsilon: Optional[float], optional
    :raises NumericFailure: When the eigensolver fails
    :return: Projectors, ranks and the descending spectrum
    :rtype: NullSpace
    """
    epsilon = tolerances.default_epsilon if epsilon is None else epsilon
    if epsilon < 0:
        raise MalformedInput(f"epsilon must be non-negative, got {epsilon}")
    try:
        eigenvalues, eigenvectors = scipy.linalg.eigh(moment.entries)
    except (np.linalg.LinAlgError, ValueError) as exc:
        norm = np.linalg.norm(moment.entries)
        raise NumericFailure(f"eigendecomposition failed ({exc}); |M|_F = {norm:.3e}")

    largest = max(float(eigenvalues[-1]), 0.0)
    zero_tol = max(tolerances.zero_tol_abs, tolerances.zero_tol_rel * largest)
    null_mask = eigenvalues <= zero_tol
    eps_mask = eigenvalues <= max(epsilon, zero_tol)

    null_basis = eigenvectors[:, null_mask]
    eps_basis = eigenvectors[:, eps_mask]
    return NullSpace(
        null_projector=null_basis @ null_basis.T,
        eps_projector=eps_basis @ eps_basis.T,
        null_rank=int(null_mask.sum()),
        eps_rank=int(eps_mask.sum()),
        singular_values=np.clip(eigenvalues[::-1], 0.0, None),
    )


@dataclass
class FitConfig:
    """Knobs of :func:`fit`"""
    degree: int
    epsilon: float = tolerances.default_epsilon
    include_constant: bool = True
    scaling: str = "raw"
    projection_dim: Optional[int] = None
    seed: int = 0


def fit(cloud: PointCloud, config: FitConfig) -> Signature:
    """
    Optional random projection, then embed, average and split the spectrum

    :param cloud: Sample points
    :type cloud: PointCloud
    :param config: Degree, epsilon, basis flags and projection
    :type config: FitConfig
    :return: The signature, remembering the projection it was fit under
    :rtype: Signature
    """
    if config.degree < 1:
        raise MalformedInput(f"degree must be at least 1, got {config.degree}")
    record = None
    if config.projection_dim is not None:
        projection = RandomProjection(cloud.dim, config.projection_dim, config.seed)
        cloud = project(projection, cloud)
        record = projection.record

    basis = make_basis(
        cloud.dim,
        config.degree,
        include_constant=config.include_constant,
        scaling=config.scaling,
    )
    moment = moment_matrix(cloud, basis)
    null = null_signature(moment, config.epsilon)
    logger.debug(
        "fit %d points of dim %d at degree %d: null rank %d, eps rank %d",
        cloud.size, cloud.dim, config.degree, null.null_rank, null.eps_rank,
    )
    return Signature(
        basis=basis,
        moment=moment,
        singular_values=null.singular_values,
        null_projector=null.null_projector,
        eps_projector=null.eps_projector,
        epsilon=config.epsilon,
        null_rank=null.null_rank,
        eps_rank=null.eps_rank,
        projection=record,
    )


def from_equations(basis: MonomialBasis, coefficients: np.ndarray, epsilon: Optional[float] = None) -> Signature:
    """
    Signature of the concept cut out by known polynomials: T projects onto
    the span of the coefficient rows, F stands in for the moment matrix.

    :param basis: Basis the coefficient vectors live in
    :type basis: MonomialBasis
    :param coefficients: One coefficient vector per row
    :type coefficients: np.ndarray
    :param epsilon: Recorded epsilon, defaults to tolerances.default_epsilon
    :type epsilon: Optional[float], optional
    :return: Signature with T_eps equal to T
    :rtype: Signature
    """
    coefficients = np.atleast_2d(np.asarray(coefficients, dtype=float))
    if coefficients.shape[1] != basis.size:
        raise DimensionMismatch(f"coefficient vectors of length {coefficients.shape[1]} for a basis of size {basis.size}")
    span = scipy.linalg.orth(coefficients.T)
    null = span @ span.T
    rank = span.shape[1]
    complement = np.eye(basis.size) - null
    return Signature(
        basis=basis,
        moment=MomentMatrix(complement, basis),
        singular_values=np.concatenate([np.ones(basis.size - rank), np.zeros(rank)]),
        null_projector=null,
        eps_projector=null.copy(),
        epsilon=tolerances.default_epsilon if epsilon is None else epsilon,
        null_rank=rank,
        eps_rank=rank,
    )


def _features(sig: Signature, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != sig.input_dim:
        raise DimensionMismatch(f"point has dimension {points.shape[1]}, signature expects {sig.input_dim}")
    if sig.projection is not None:
        points = RandomProjection.from_record(sig.projection).apply(points)
    return sig.basis.embed_many(points)


def membership_scores(sig: Signature, points: np.ndarray, use_eps: bool = False) -> np.ndarray:
    """Vectorized :func:`membership_score` over the rows of points"""
    features = _features(sig, points)
    projector = sig.projector(use_eps)
    scores = np.einsum("ij,jk,ik->i", features, projector, features)
    return np.clip(scores, 0.0, None)


def membership_score(sig: Signature, x: np.ndarray, use_eps: bool = False) -> float:
    """
    phi(x)^T T phi(x), zero exactly on the concept

    :param sig: Signature of the concept
    :type sig: Signature
    :param x: Point in the signature's input space (before projection)
    :type x: np.ndarray
    :param use_eps: Score against T_eps instead of T, defaults to False
    :type use_eps: bool, optional
    :return: Non-negative score
    :rtype: float
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("membership_score expects a single point")
    return float(membership_scores(sig, x[None, :], use_eps)[0])
