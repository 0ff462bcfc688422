"""
Module for the polynomial feature map phi: R^d -> R^m.
A MonomialBasis fixes which monomials are used and in which order
(graded lexicographic, constant term first), so coefficient vectors and
null vectors can be compared across runs and files.
"""
from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np  # type: ignore

import tolerances
from exceptions import BasisTooLarge, DimensionMismatch, MalformedInput
from wick import gaussian_moment

SCALINGS = ("raw", "bombieri")


@dataclass(frozen=True)
class MultiIndex:
    """Exponent vector of a single monomial"""
    exponents: Tuple[int, ...]

    @property
    def degree(self) -> int:
        """Total degree, the sum of the exponents"""
        return sum(self.exponents)

    def label(self) -> str:
        """Readable name, e.g. 'x1^2*x2' or '1' for the constant"""
        parts = []
        for position, power in enumerate(self.exponents, start=1):
            if power == 1:
                parts.append(f"x{position}")
            elif power > 1:
                parts.append(f"x{position}^{power}")
        return "*".join(parts) if parts else "1"


def _graded_lex(dim: int, max_degree: int) -> List[MultiIndex]:
    """
    Enumerate every exponent vector of degree <= max_degree in graded
    lexicographic order. combinations_with_replacement over the variable
    positions already walks each degree in lex order (x1^2, x1x2, x2^2, ...).
    """
    indices = []
    for degree in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(dim), degree):
            exponents = [0] * dim
            for variable in combo:
                exponents[variable] += 1
            indices.append(MultiIndex(tuple(exponents)))
    return indices


class MonomialBasis:
    """
    Ordered set of monomials defining phi up to degree max_degree.
    Immutable after construction.

    :param dim: Ambient dimension d
    :type dim: int
    :param max_degree: Largest monomial degree
    :type max_degree: int
    :param include_constant: Keep the constant monomial 1 in front, defaults to True
    :type include_constant: bool, optional
    :param scaling: 'raw' monomials or 'bombieri' weights sqrt(|a|!/a!), defaults to 'raw'
    :type scaling: str, optional
    """

    def __init__(
        self,
        dim: int,
        max_degree: int,
        include_constant: bool = True,
        scaling: str = "raw",
    ):
        if scaling not in SCALINGS:
            raise MalformedInput(f"unknown scaling {scaling!r}", source="scaling")
        self.dim = dim
        self.max_degree = max_degree
        self.include_constant = include_constant
        self.scaling = scaling

        full = _graded_lex(dim, max_degree)
        self._full_exponents = np.array([index.exponents for index in full], dtype=np.int64)
        # Every monomial past the constant is its parent times one variable.
        self._parents = np.zeros(len(full), dtype=np.int64)
        self._variables = np.zeros(len(full), dtype=np.int64)
        position = {index.exponents: i for i, index in enumerate(full)}
        for i, index in enumerate(full[1:], start=1):
            variable = next(j for j, power in enumerate(index.exponents) if power)
            parent = list(index.exponents)
            parent[variable] -= 1
            self._parents[i] = position[tuple(parent)]
            self._variables[i] = variable

        self._offset = 0 if include_constant else 1
        self.indices: List[MultiIndex] = full[self._offset:]
        self.exponents = self._full_exponents[self._offset:]
        self.size = len(self.indices)
        self._position = {index.exponents: i for i, index in enumerate(self.indices)}

        if scaling == "bombieri":
            self.weights = np.array(
                [
                    math.sqrt(
                        math.factorial(index.degree)
                        / math.prod(math.factorial(p) for p in index.exponents)
                    )
                    for index in self.indices
                ]
            )
        else:
            self.weights = np.ones(self.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MonomialBasis):
            return NotImplemented
        return self.describe() == other.describe()

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.describe().items())))

    def __repr__(self) -> str:
        return (
            f"MonomialBasis(dim={self.dim}, max_degree={self.max_degree}, "
            f"include_constant={self.include_constant}, scaling={self.scaling!r})"
        )

    def describe(self) -> Dict[str, object]:
        """The JSON description stored inside signature files"""
        return {
            "dim": self.dim,
            "max_degree": self.max_degree,
            "order": "grlex",
            "include_constant": self.include_constant,
            "scaling": self.scaling,
        }

    @classmethod
    def from_description(cls, data: Mapping[str, object]) -> MonomialBasis:
        """Rebuild a basis from :meth:`describe` output"""
        try:
            if data.get("order", "grlex") != "grlex":
                raise MalformedInput(f"unsupported order {data['order']!r}", source="basis.order")
            return make_basis(
                int(data["dim"]),
                int(data["max_degree"]),
                include_constant=bool(data.get("include_constant", True)),
                scaling=str(data.get("scaling", "raw")),
            )
        except KeyError as exc:
            raise MalformedInput(f"missing field {exc.args[0]!r}", source="basis")

    def labels(self) -> List[str]:
        """Readable monomial names in basis order"""
        return [index.label() for index in self.indices]

    def index_of(self, exponents: Sequence[int]) -> int:
        """Position of the monomial with the given exponents"""
        key = tuple(int(p) for p in exponents)
        if key not in self._position:
            raise MalformedInput(f"monomial {key} is not in the basis")
        return self._position[key]

    def embed_many(self, points: np.ndarray) -> np.ndarray:
        """
        Evaluate phi on every row of an N x d array.

        :param points: N x d array
        :type points: np.ndarray
        :raises DimensionMismatch: When the rows are not of length dim
        :return: N x m feature matrix
        :rtype: np.ndarray
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.dim:
            raise DimensionMismatch(
                f"points have dimension {points.shape[1]}, basis expects {self.dim}"
            )
        features = np.empty((points.shape[0], len(self._parents)))
        features[:, 0] = 1.0
        for i in range(1, len(self._parents)):
            features[:, i] = features[:, self._parents[i]] * points[:, self._variables[i]]
        return features[:, self._offset:] * self.weights

    def embed(self, x: Sequence[float]) -> np.ndarray:
        """Evaluate phi on a single point"""
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise DimensionMismatch("embed expects a single point, use embed_many for clouds")
        return self.embed_many(x[None, :])[0]

    def sphere_gram(self) -> np.ndarray:
        """
        Gram matrix of the basis under E_{y on the unit sphere}[p(y) q(y)].
        Uses the closed form E[y^g] = prod (g_i - 1)!! / (d (d+2) ... (d+|g|-2))
        for even g and 0 otherwise.
        """
        gram = np.zeros((self.size, self.size))
        for i in range(self.size):
            for j in range(i, self.size):
                value = _sphere_moment(self.exponents[i] + self.exponents[j])
                gram[i, j] = gram[j, i] = value * self.weights[i] * self.weights[j]
        return gram


def _sphere_moment(exponents: np.ndarray) -> float:
    if np.any(exponents % 2):
        return 0.0
    dim = len(exponents)
    half = int(exponents.sum()) // 2
    return gaussian_moment(exponents) / math.prod(dim + 2 * j for j in range(half))


def make_basis(
    dim: int,
    max_degree: int,
    include_constant: bool = True,
    scaling: str = "raw",
    cap: Optional[int] = None,
) -> MonomialBasis:
    """
    Build the graded-lex basis of all monomials of degree <= max_degree

    :param dim: Ambient dimension, at least 1
    :type dim: int
    :param max_degree: Degree l, at least 1
    :type max_degree: int
    :param include_constant: Keep the constant monomial, defaults to True
    :type include_constant: bool, optional
    :param scaling: 'raw' or 'bombieri', defaults to 'raw'
    :type scaling: str, optional
    :param cap: Largest allowed size, defaults to tolerances.basis_size_cap
    :type cap: Optional[int], optional
    :raises BasisTooLarge: When binomial(d+l, l) exceeds the cap
    :return: The basis
    :rtype: MonomialBasis
    """
    if dim < 1 or max_degree < 1:
        raise MalformedInput(f"need dim >= 1 and degree >= 1, got ({dim}, {max_degree})")
    cap = tolerances.basis_size_cap if cap is None else cap
    size = math.comb(dim + max_degree, max_degree) - (0 if include_constant else 1)
    if size > cap:
        raise BasisTooLarge(size, cap)
    return MonomialBasis(dim, max_degree, include_constant=include_constant, scaling=scaling)


def required_degree(k: int, r: int, limit: int = sys.maxsize) -> int:
    """
    Feature degree r^k that is enough to expose the vanishing ideal of a
    k-dimensional manifold with a degree r generator.
    """
    if k < 1 or r < 1:
        raise MalformedInput(f"need k >= 1 and r >= 1, got ({k}, {r})")
    value = r ** k
    if value > limit:
        raise MalformedInput(f"required degree {r}^{k} overflows the limit {limit}")
    return value


def sample_size_bound(k: int, r: int, s: int, limit: int = sys.maxsize) -> int:
    """Recommended sample count binomial(k^r + s, s)."""
    if min(k, r, s) < 1:
        raise MalformedInput(f"need positive integers, got ({k}, {r}, {s})")
    if r * math.log(max(k, 1)) > math.log(limit):
        raise MalformedInput(f"{k}^{r} overflows the limit {limit}")
    value = math.comb(k ** r + s, s)
    if value > limit:
        raise MalformedInput(f"sample bound overflows the limit {limit}")
    return value


def polynomial_coefficients(
    basis: MonomialBasis, terms: Mapping[Tuple[int, ...], float]
) -> np.ndarray:
    """
    Coefficient vector c with c . phi(x) == sum_a terms[a] * x^a

    :param basis: Basis the vector lives in
    :type basis: MonomialBasis
    :param terms: Map from exponent tuple to coefficient
    :type terms: Mapping[Tuple[int, ...], float]
    :return: Coefficient vector of length basis.size
    :rtype: np.ndarray
    """
    coefficients = np.zeros(basis.size)
    for exponents, value in terms.items():
        i = basis.index_of(exponents)
        coefficients[i] += value / basis.weights[i]
    return coefficients


def sphere_normalize(coefficients: np.ndarray, basis: MonomialBasis) -> np.ndarray:
    """Rescale a polynomial so that E_{y on the unit sphere}[p(y)^2] = 1."""
    coefficients = np.asarray(coefficients, dtype=float)
    norm = float(coefficients @ basis.sphere_gram() @ coefficients)
    if norm <= 0.0:
        raise MalformedInput("polynomial vanishes on the unit sphere, can not normalize")
    return coefficients / math.sqrt(norm)
