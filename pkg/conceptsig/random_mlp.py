"""
Moment recovery from a two-layer random network with square activation.

Unit j has Gaussian weights r_j and reports G1_j = mean_i (x_i . r_j)^2,
which equals r_j^T M r_j for the raw second-moment matrix M. Averaging
r_j r_j^T G1_j (and r_j r_j^T G1_j^2) over units estimates Gaussian
expectations that are linear in M (and in M^2); the recovery
coefficients are calibrated against the exact moments in wick.py.
"""
from __future__ import annotations

import functools
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np  # type: ignore

import tolerances
from exceptions import CalibrationError, DimensionMismatch, MalformedInput, Uncalibrated
from point_cloud import PointCloud
from wick import outer_form_expectation

logger = logging.getLogger(__name__)

# Floats per block of projected points in g1_hat.
_BLOCK_FLOATS = 1 << 22


@dataclass(frozen=True)
class Calibration:
    """
    Recovery coefficients for one input dimension.
    moment: (a1, a2) in M = a1 E1 + a2 tr(E1) I.
    moment_squared: (b1, b2, b3, b4) in
    M^2 = b1 E2 + b2 tr(E2) I + b3 tr(E1) E1 + b4 tr(E1)^2 I.
    """
    dim: int
    moment: Tuple[float, ...]
    moment_squared: Tuple[float, ...]
    residuals: Tuple[float, float]


def _stage_one_features(e1: np.ndarray) -> np.ndarray:
    d = e1.shape[0]
    return np.stack([e1, np.trace(e1) * np.eye(d)])


def _stage_two_features(e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    d = e1.shape[0]
    t1 = np.trace(e1)
    return np.stack([e2, np.trace(e2) * np.eye(d), t1 * e1, t1 ** 2 * np.eye(d)])


def _test_matrices(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.5, 2.0, size=(count, d))


def _solve(features: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Minimum-norm least squares over the diagonals of every test matrix"""
    design = np.concatenate([np.stack([np.diagonal(term) for term in f], axis=1) for f in features])
    goal = np.concatenate(targets)
    coefficients, *_ = np.linalg.lstsq(design, goal, rcond=None)
    return coefficients


def _apply(coefficients: np.ndarray, features: np.ndarray) -> np.ndarray:
    return np.tensordot(coefficients, features, axes=1)


def _relative_residual(coefficients, features, targets) -> float:
    worst = 0.0
    for f, target in zip(features, targets):
        predicted = np.diagonal(_apply(coefficients, f))
        worst = max(worst, float(np.linalg.norm(predicted - target) / np.linalg.norm(target)))
    return worst


def calibrate(d: int, seed: int = 0, n_fit: int = 6, n_holdout: int = 4, tol: Optional[float] = None) -> Calibration:
    """
    Solve for the recovery coefficients against the exact Gaussian moments
    of random diagonal test matrices, then check them on held-out ones.

    :param d: Input dimension
    :type d: int
    :param seed: Seed of the test matrices, defaults to 0
    :type seed: int, optional
    :param n_fit: Test matrices used to solve, defaults to 6
    :type n_fit: int, optional
    :param n_holdout: Test matrices used to check, defaults to 4
    :type n_holdout: int, optional
    :param tol: Largest acceptable held-out residual, defaults to tolerances.calibration_tol
    :type tol: Optional[float], optional
    :raises CalibrationError: When the held-out residual exceeds tol
    :return: The coefficients
    :rtype: Calibration
    """
    if d < 1:
        raise MalformedInput(f"dimension must be positive, got {d}")
    tol = tolerances.calibration_tol if tol is None else tol
    rng = np.random.default_rng(seed)
    fit_diagonals = _test_matrices(d, n_fit, rng)
    check_diagonals = _test_matrices(d, n_holdout, rng)

    def expectations(diagonals):
        e1 = [outer_form_expectation(a, 1) for a in diagonals]
        e2 = [outer_form_expectation(a, 2) for a in diagonals]
        return e1, e2

    fit_e1, fit_e2 = expectations(fit_diagonals)
    check_e1, check_e2 = expectations(check_diagonals)

    stage_one = [_stage_one_features(e1) for e1 in fit_e1]
    a = _solve(stage_one, list(fit_diagonals))
    residual_one = _relative_residual(a, [_stage_one_features(e1) for e1 in check_e1], list(check_diagonals))
    if residual_one > tol:
        raise CalibrationError("moment", residual_one)

    stage_two = [_stage_two_features(e1, e2) for e1, e2 in zip(fit_e1, fit_e2)]
    b = _solve(stage_two, list(fit_diagonals ** 2))
    residual_two = _relative_residual(
        b, [_stage_two_features(e1, e2) for e1, e2 in zip(check_e1, check_e2)], list(check_diagonals ** 2)
    )
    if residual_two > tol:
        raise CalibrationError("moment_squared", residual_two)

    logger.debug("calibrated d=%d: a=%s b=%s", d, a, b)
    return Calibration(d, tuple(float(x) for x in a), tuple(float(x) for x in b), (residual_one, residual_two))


@functools.lru_cache(maxsize=32)
def calibration_for(d: int) -> Calibration:
    """Calibration with default settings, computed once per dimension"""
    return calibrate(d)


def published_coefficients(d: int) -> Dict[str, float]:
    """
    Constants as originally published: M = E1 - (d+1) I and
    M^2 = E1 + beta1 E2 + beta2 I with beta1 = -(2d+2), beta2 = d^2+1.
    Reported next to the calibrated ones, not used for recovery.
    """
    return {"shift": float(d + 1), "beta1": float(-(2 * d + 2)), "beta2": float(d * d + 1)}


def published_residuals(d: int, seed: int = 0, count: int = 4) -> Tuple[float, float]:
    """Largest relative error of the published constants on exact expectations"""
    constants = published_coefficients(d)
    rng = np.random.default_rng(seed)
    worst_one = worst_two = 0.0
    for a in _test_matrices(d, count, rng):
        e1 = outer_form_expectation(a, 1)
        e2 = outer_form_expectation(a, 2)
        m = np.diag(a)
        one = e1 - constants["shift"] * np.eye(d)
        two = e1 + constants["beta1"] * e2 + constants["beta2"] * np.eye(d)
        worst_one = max(worst_one, float(np.linalg.norm(one - m) / np.linalg.norm(m)))
        worst_two = max(worst_two, float(np.linalg.norm(two - m @ m) / np.linalg.norm(m @ m)))
    return worst_one, worst_two


class RandomMLP:
    """
    Random first layer of a square-activation network

    :param d: Input dimension
    :type d: int
    :param units: Number of hidden units, defaults to tolerances.mlp_units
    :type units: Optional[int], optional
    :param seed: Seed of the Gaussian weights, defaults to 0
    :type seed: int, optional
    """

    def __init__(self, d: int, units: Optional[int] = None, seed: int = 0):
        units = tolerances.mlp_units if units is None else units
        if d < 1 or units < 1:
            raise MalformedInput(f"need positive dimension and units, got d={d}, units={units}")
        self.d = d
        self.units = units
        self.seed = seed
        self.weights = np.random.default_rng(seed).standard_normal((units, d))
        self.calibration: Optional[Calibration] = None

    def calibrate(self, seed: int = 0) -> Calibration:
        self.calibration = calibration_for(self.d) if seed == 0 else calibrate(self.d, seed)
        return self.calibration

    def _require_calibration(self) -> Calibration:
        if self.calibration is None:
            raise Uncalibrated("call calibrate() before recovering moments")
        return self.calibration


def raw_moment(cloud: PointCloud) -> np.ndarray:
    """(1/N) sum x x^T, no constant coordinate"""
    return cloud.points.T @ cloud.points / cloud.size


def g1_hat(net: RandomMLP, cloud: PointCloud) -> np.ndarray:
    """
    Mean squared activation of every unit over the cloud

    :param net: The network
    :type net: RandomMLP
    :param cloud: Input points of dimension net.d
    :type cloud: PointCloud
    :raises DimensionMismatch: When the cloud dimension is not net.d
    :return: One value per unit, equal to r_j^T M r_j
    :rtype: np.ndarray
    """
    if cloud.dim != net.d:
        raise DimensionMismatch(f"cloud has dimension {cloud.dim}, network expects {net.d}")
    block = max(1, _BLOCK_FLOATS // cloud.size)
    values = np.empty(net.units)
    for start in range(0, net.units, block):
        activations = cloud.points @ net.weights[start:start + block].T
        values[start:start + block] = np.mean(activations ** 2, axis=0)
    return values


def _weighted_outer(net: RandomMLP, weights: np.ndarray) -> np.ndarray:
    return net.weights.T @ (weights[:, None] * net.weights) / net.units


def stein_estimates(net: RandomMLP, cloud: PointCloud) -> Tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo estimates of E[r r^T G1] and E[r r^T G1^2]"""
    g1 = g1_hat(net, cloud)
    return _weighted_outer(net, g1), _weighted_outer(net, g1 ** 2)


def recover_from_expectations(
    calibration: Calibration, e1: np.ndarray, e2: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Apply calibrated coefficients to (estimated or exact) expectations"""
    moment = _apply(np.array(calibration.moment), _stage_one_features(e1))
    if e2 is None:
        return moment, None
    squared = _apply(np.array(calibration.moment_squared), _stage_two_features(e1, e2))
    return moment, squared


def recover_moment(net: RandomMLP, cloud: PointCloud) -> np.ndarray:
    """
    Estimate of the raw moment matrix from the network's unit activations.

    :raises Uncalibrated: When calibrate() has not run
    """
    calibration = net._require_calibration()
    g1 = g1_hat(net, cloud)
    moment, _ = recover_from_expectations(calibration, _weighted_outer(net, g1))
    return moment


def recover_moment_squared(net: RandomMLP, cloud: PointCloud) -> np.ndarray:
    """
    Estimate of the square of the raw moment matrix, using G2 = G1^2.

    :raises Uncalibrated: When calibrate() has not run
    """
    calibration = net._require_calibration()
    e1, e2 = stein_estimates(net, cloud)
    _, squared = recover_from_expectations(calibration, e1, e2)
    return squared
