import math

import numpy as np
import pytest

from qmimo.errors import InvalidInputError
from qmimo.polynomial import MultivariatePolynomial, Term, eval_poly, monomial_exponents


class TestMultivariatePolynomial:
    @pytest.fixture
    def poly(self) -> MultivariatePolynomial:
        """``y1**2 - 3 y2 + 0.5``."""
        return MultivariatePolynomial.from_mapping({(2, 0): 1.0, (0, 1): -3.0, (0, 0): 0.5}, 2)

    def test_evaluate(self, poly):
        """Point evaluation sums coefficient times monomial."""
        assert poly.evaluate([2.0, 1.0]) == 1.5
        assert eval_poly(poly, (2.0, 1.0)) == 1.5
        assert poly([0.0, 0.0]) == 0.5

    def test_evaluate_batch_matches_points(self, poly):
        """Vectorized evaluation agrees with the exact point sums."""
        y = np.random.default_rng(0).normal(size=(20, 2))
        expected = [poly.evaluate(row) for row in y]
        np.testing.assert_allclose(poly.evaluate_batch(y), expected, rtol=1e-12, atol=1e-12)

    def test_dimension_mismatch(self, poly):
        """Points must have one coordinate per variable."""
        with pytest.raises(InvalidInputError):
            poly.evaluate([1.0])
        with pytest.raises(InvalidInputError):
            poly.evaluate_batch(np.zeros((3, 3)))

    def test_terms_merged_and_zeros_dropped(self):
        """Duplicate monomials add up and cancelled terms disappear."""
        poly = MultivariatePolynomial(
            dim=1, terms=(Term(exps=(1,), coef=2.0), Term(exps=(1,), coef=-2.0), Term(exps=(0,), coef=1.0))
        )
        assert poly.terms == (Term(exps=(0,), coef=1.0),)
        assert poly.degree == 0

    def test_dimension_inferred(self):
        """Omitting dim reads it from the first exponent vector."""
        poly = MultivariatePolynomial(terms=(Term(exps=(1, 0, 2), coef=1.0),))
        assert poly.dim == 3
        assert poly.degree == 3

    def test_empty_needs_dimension(self):
        """The zero polynomial cannot infer its dimension."""
        with pytest.raises(ValueError):
            MultivariatePolynomial(terms=())

    def test_inconsistent_exponents(self):
        """Every exponent vector has length dim."""
        with pytest.raises(ValueError):
            MultivariatePolynomial(dim=2, terms=(Term(exps=(1,), coef=1.0),))

    def test_constructors(self):
        """Projection, affine and univariate helpers produce the expected terms."""
        assert MultivariatePolynomial.projection(3, 1).coefficient((0, 1, 0)) == 1.0
        affine = MultivariatePolynomial.linear([2.0, -1.0], constant=4.0)
        assert affine.evaluate([1.0, 1.0]) == 5.0
        scalar = MultivariatePolynomial.univariate([1.0, 0.0, 3.0])
        np.testing.assert_array_equal(scalar.univariate_coefficients(), [1.0, 0.0, 3.0])

    def test_projection_out_of_range(self):
        """Coordinates are zero-based and below dim."""
        with pytest.raises(InvalidInputError):
            MultivariatePolynomial.projection(2, 2)

    def test_univariate_coefficients_need_one_variable(self, poly):
        """Only scalar polynomials have a coefficient vector."""
        with pytest.raises(InvalidInputError):
            poly.univariate_coefficients()

    def test_rescaled(self):
        """rescaled(c) evaluates the polynomial at c * y."""
        poly = MultivariatePolynomial.univariate([0.0, 1.0, 1.0])
        assert poly.rescaled(2.0).evaluate([1.0]) == poly.evaluate([2.0]) == 6.0

    def test_json_round_trip(self, poly):
        """Polynomials serialize through pydantic."""
        assert MultivariatePolynomial.model_validate_json(poly.model_dump_json()) == poly


class TestMonomialExponents:
    @pytest.mark.parametrize("dim,degree", [(1, 3), (2, 2), (3, 2), (2, 4)])
    def test_count(self, dim, degree):
        """There are C(dim + degree, degree) monomials of degree at most ``degree``."""
        exponents = monomial_exponents(dim, degree)
        assert len(exponents) == len(set(exponents)) == math.comb(dim + degree, degree)

    def test_graded_order(self):
        """Constant first, then by total degree."""
        exponents = monomial_exponents(2, 2)
        assert exponents[0] == (0, 0)
        assert [sum(e) for e in exponents] == sorted(sum(e) for e in exponents)
        assert exponents[1:3] == [(1, 0), (0, 1)]
