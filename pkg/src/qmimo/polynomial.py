"""Sparse real multivariate polynomials used as analog front-end functions."""

import math
from collections.abc import Mapping, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, NonNegativeInt, PositiveInt, field_validator, model_validator

from qmimo.errors import InvalidInputError


class Term(BaseModel):
    """One monomial ``coef * prod_j y_j ** exps[j]``."""

    model_config = ConfigDict(frozen=True)

    exps: tuple[NonNegativeInt, ...]
    coef: float

    @property
    def degree(self) -> int:
        """Total degree of the monomial."""
        return sum(self.exps)


class MultivariatePolynomial(BaseModel):
    """
    Polynomial in ``dim`` real variables stored as a sorted tuple of nonzero terms.

    Duplicate exponent vectors are merged and zero coefficients dropped at construction. When ``dim`` is
    omitted it is inferred from the exponent vectors.

    Attributes:
        dim (int): number of variables
        terms (tuple[Term, ...]): nonzero monomials sorted by exponent vector
    """

    model_config = ConfigDict(frozen=True)

    dim: PositiveInt
    terms: tuple[Term, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _infer_dim(cls, data):
        if isinstance(data, Mapping) and data.get("dim") is None:
            terms = data.get("terms") or ()
            first = next(iter(terms), None)
            if first is None:
                raise ValueError("dim is required for a polynomial without terms.")
            exps = first.exps if isinstance(first, Term) else first["exps"]
            data = {**data, "dim": len(exps)}
        return data

    @field_validator("terms")
    @classmethod
    def _normalize_terms(cls, terms: tuple[Term, ...]) -> tuple[Term, ...]:
        merged: dict[tuple[int, ...], float] = {}
        for term in terms:
            merged[term.exps] = merged.get(term.exps, 0.0) + term.coef
        return tuple(Term(exps=exps, coef=coef) for exps, coef in sorted(merged.items()) if coef != 0.0)

    @model_validator(mode="after")
    def _check_lengths(self) -> "MultivariatePolynomial":
        if any(len(term.exps) != self.dim for term in self.terms):
            raise ValueError(f"Every exponent vector must have length {self.dim}.")
        return self

    @classmethod
    def from_mapping(cls, coefficients: Mapping[tuple[int, ...], float], dim: int) -> "MultivariatePolynomial":
        """Create a polynomial from an exponent-vector -> coefficient mapping."""
        terms = tuple(Term(exps=tuple(exps), coef=float(coef)) for exps, coef in coefficients.items())
        return cls(dim=dim, terms=terms)

    @classmethod
    def projection(cls, dim: int, index: int) -> "MultivariatePolynomial":
        """The coordinate function ``y_index``."""
        if not 0 <= index < dim:
            raise InvalidInputError(f"Coordinate {index} out of range for dimension {dim}.")
        exps = tuple(int(j == index) for j in range(dim))
        return cls(dim=dim, terms=(Term(exps=exps, coef=1.0),))

    @classmethod
    def linear(cls, coefficients: Sequence[float], constant: float = 0.0) -> "MultivariatePolynomial":
        """The affine function ``sum_j a_j y_j + constant``."""
        dim = len(coefficients)
        mapping = {tuple(int(j == i) for j in range(dim)): float(a) for i, a in enumerate(coefficients)}
        mapping[(0,) * dim] = mapping.get((0,) * dim, 0.0) + float(constant)
        return cls.from_mapping(mapping, dim)

    @classmethod
    def univariate(cls, coefficients: Sequence[float]) -> "MultivariatePolynomial":
        """The polynomial ``sum_k c_k y^k`` in one variable, coefficients in ascending order."""
        return cls.from_mapping({(k,): float(c) for k, c in enumerate(coefficients)}, 1)

    @property
    def degree(self) -> int:
        """Maximum total degree over the stored terms, 0 for the zero polynomial."""
        return max((term.degree for term in self.terms), default=0)

    def coefficient(self, exps: Sequence[int]) -> float:
        """Coefficient of the monomial with the given exponent vector."""
        key = tuple(exps)
        return next((term.coef for term in self.terms if term.exps == key), 0.0)

    def univariate_coefficients(self) -> np.ndarray:
        """Ascending coefficients ``c_0 .. c_degree`` of a polynomial in one variable."""
        if self.dim != 1:
            raise InvalidInputError(f"Polynomial has {self.dim} variables, expected 1.")
        coefficients = np.zeros(self.degree + 1)
        for term in self.terms:
            coefficients[term.exps[0]] = term.coef
        return coefficients

    def evaluate(self, y: Sequence[float]) -> float:
        """Evaluate at a single point as an exact sum of coefficient times monomial values."""
        values = [float(v) for v in np.ravel(np.asarray(y, dtype=float))]
        if len(values) != self.dim:
            raise InvalidInputError(f"Expected a point of dimension {self.dim}, got {len(values)}.")
        return math.fsum(term.coef * math.prod(v**e for v, e in zip(values, term.exps)) for term in self.terms)

    def evaluate_batch(self, y: np.ndarray) -> np.ndarray:
        """Evaluate at every row of an ``(N, dim)`` array."""
        y = np.asarray(y, dtype=float)
        if y.ndim == 1 and self.dim == 1:
            y = y[:, None]
        if y.ndim != 2 or y.shape[1] != self.dim:
            raise InvalidInputError(f"Expected points of shape (N, {self.dim}), got {y.shape}.")
        result = np.zeros(y.shape[0])
        for term in self.terms:
            result += term.coef * np.prod(y ** np.asarray(term.exps), axis=1)
        return result

    def rescaled(self, factor: float) -> "MultivariatePolynomial":
        """The polynomial ``y -> p(factor * y)``; each term is multiplied by ``factor ** degree``."""
        terms = tuple(Term(exps=term.exps, coef=term.coef * factor**term.degree) for term in self.terms)
        return MultivariatePolynomial(dim=self.dim, terms=terms)

    def __call__(self, y: Sequence[float]) -> float:
        """Alias of `evaluate`."""
        return self.evaluate(y)


def eval_poly(p: MultivariatePolynomial, y: Sequence[float]) -> float:
    """Evaluate ``p`` at the point ``y``."""
    return p.evaluate(y)


def monomial_exponents(dim: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent vectors in ``dim`` variables of total degree at most ``degree``, graded then lexicographic."""
    exponents: list[tuple[int, ...]] = []
    for total in range(degree + 1):
        exponents.extend(sorted(_compositions(total, dim), reverse=True))
    return exponents


def _compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    if parts == 1:
        return [(total,)]
    return [(first,) + rest for first in range(total + 1) for rest in _compositions(total - first, parts - 1)]
