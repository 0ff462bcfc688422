import math

import numpy as np  # type: ignore
import pytest

from exceptions import BasisTooLarge, DimensionMismatch, MalformedInput
from monomials import (
    MonomialBasis,
    make_basis,
    polynomial_coefficients,
    required_degree,
    sample_size_bound,
    sphere_normalize,
)


class TestMakeBasis:
    def test_size_is_binomial(self):
        for d, degree in [(1, 1), (2, 2), (3, 2), (5, 3)]:
            assert make_basis(d, degree).size == math.comb(d + degree, degree)

    def test_without_constant(self):
        assert make_basis(3, 1, include_constant=False).size == 3

    def test_graded_lex_order(self):
        assert make_basis(2, 2).labels() == ["1", "x1", "x2", "x1^2", "x1*x2", "x2^2"]

    def test_cap(self):
        with pytest.raises(BasisTooLarge):
            make_basis(50, 4)
        assert make_basis(3, 2, cap=10).size == 10
        with pytest.raises(BasisTooLarge):
            make_basis(3, 2, cap=9)

    def test_rejects_zero_degree(self):
        with pytest.raises(MalformedInput):
            make_basis(2, 0)

    def test_description_round_trip(self):
        basis = make_basis(3, 2, include_constant=False, scaling="bombieri")
        assert MonomialBasis.from_description(basis.describe()) == basis

    def test_unknown_order(self):
        description = make_basis(2, 1).describe()
        description["order"] = "lex"
        with pytest.raises(MalformedInput):
            MonomialBasis.from_description(description)


class TestEmbed:
    def test_circle_point(self):
        np.testing.assert_allclose(make_basis(2, 2).embed([2.0, 3.0]), [1, 2, 3, 4, 6, 9])

    def test_many_matches_single(self):
        basis = make_basis(3, 3)
        points = np.random.default_rng(0).standard_normal((5, 3))
        features = basis.embed_many(points)
        for row, x in zip(features, points):
            np.testing.assert_allclose(row, basis.embed(x))

    def test_wrong_dimension(self):
        with pytest.raises(DimensionMismatch):
            make_basis(2, 2).embed([1.0, 2.0, 3.0])

    def test_bombieri_inner_product(self):
        basis = make_basis(3, 3, scaling="bombieri")
        rng = np.random.default_rng(1)
        x, y = rng.standard_normal((2, 3))
        expected = sum((x @ y) ** k for k in range(4))
        assert basis.embed(x) @ basis.embed(y) == pytest.approx(expected)


class TestCoefficients:
    def test_polynomial_coefficients_evaluate(self):
        basis = make_basis(2, 2, scaling="bombieri")
        c = polynomial_coefficients(basis, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})
        assert c @ basis.embed([0.6, 0.8]) == pytest.approx(0.0, abs=1e-12)
        assert c @ basis.embed([2.0, 0.0]) == pytest.approx(3.0)

    def test_sphere_normalize(self):
        basis = make_basis(3, 2)
        c = sphere_normalize(polynomial_coefficients(basis, {(1, 0, 0): 1.0}), basis)
        # E[x1^2] on S^2 is 1/3
        rng = np.random.default_rng(2)
        y = rng.standard_normal((20000, 3))
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        assert np.mean((basis.embed_many(y) @ c) ** 2) == pytest.approx(1.0, rel=0.05)
        assert c[basis.index_of((1, 0, 0))] == pytest.approx(math.sqrt(3.0))

    def test_sphere_gram_moments(self):
        basis = make_basis(3, 2)
        gram = basis.sphere_gram()
        square, cross = basis.index_of((2, 0, 0)), basis.index_of((0, 2, 0))
        assert gram[square, square] == pytest.approx(1.0 / 5.0)
        assert gram[square, cross] == pytest.approx(1.0 / 15.0)
        assert gram[basis.index_of((1, 0, 0)), square] == 0.0

    def test_sphere_normalize_zero(self):
        basis = make_basis(2, 1)
        with pytest.raises(MalformedInput):
            sphere_normalize(np.zeros(basis.size), basis)


class TestBounds:
    def test_required_degree(self):
        assert required_degree(2, 3) == 9
        with pytest.raises(MalformedInput):
            required_degree(10, 10, limit=1000)

    def test_sample_size_bound(self):
        assert sample_size_bound(1, 2, 2) == 3
        assert sample_size_bound(2, 2, 2) == math.comb(6, 2)
        with pytest.raises(MalformedInput):
            sample_size_bound(0, 1, 1)
