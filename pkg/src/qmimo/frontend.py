"""Analog front-end families, one-bit quantization, induced partitions, cell indexing and polynomial approximation."""

import itertools
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Literal

import numpy as np
from numpy.polynomial import polynomial as npoly
from pydantic import BaseModel, ConfigDict, PositiveInt, model_validator
from scipy import stats

from qmimo.channel import ChannelModel, apply_channel
from qmimo.errors import (
    BoundaryAmbiguityError,
    InvalidInputError,
    ScenarioViolationError,
    UnsupportedDimensionError,
    UnsupportedFamilyError,
)
from qmimo.polynomial import MultivariatePolynomial, Term
from qmimo.seeding import derive_rng

logger = logging.getLogger(__name__)

ROOT_TOL = 1e-12
BOUNDARY_TOL = 1e-12


class Scenario(StrEnum):
    """Analog-function families, nested as I < II < V < IV (d >= 2) < III."""

    PROJECTION = "I"
    LINEAR = "II"
    POLYNOMIAL = "III"
    BOUNDED_DEGREE = "IV"
    ISOTROPIC_QUADRATIC = "V"


def isotropic_function(linear: Sequence[float], quadratic: float) -> MultivariatePolynomial:
    """Scenario-V function ``sum_k a_k y_k + q * sum_k y_k**2``."""
    dim = len(linear)
    mapping: dict[tuple[int, ...], float] = {}
    for k, a in enumerate(linear):
        mapping[tuple(int(j == k) for j in range(dim))] = float(a)
        mapping[tuple(2 * int(j == k) for j in range(dim))] = float(quadratic)
    return MultivariatePolynomial.from_mapping(mapping, dim)


def split_isotropic(p: MultivariatePolynomial) -> tuple[np.ndarray, float] | None:
    """Return ``(a, q)`` with ``p = a . y + q ||y||^2``, or ``None`` when ``p`` is outside that span."""
    linear = np.zeros(p.dim)
    squares: dict[int, float] = {}
    for term in p.terms:
        nonzero = [k for k, e in enumerate(term.exps) if e]
        if len(nonzero) != 1:
            return None
        k = nonzero[0]
        if term.exps[k] == 1:
            linear[k] = term.coef
        elif term.exps[k] == 2:
            squares[k] = term.coef
        else:
            return None
    if not squares:
        return linear, 0.0
    values = set(squares.values())
    if len(squares) != p.dim or len(values) != 1:
        return None
    return linear, values.pop()


def _is_projection(p: MultivariatePolynomial, index: int) -> bool:
    return p == MultivariatePolynomial.projection(p.dim, index)


def _is_homogeneous_linear(p: MultivariatePolynomial) -> bool:
    return all(term.degree == 1 for term in p.terms)


class FrontendSpec(BaseModel):
    """
    Bank of ``n_q`` analog functions followed by one-bit threshold ADCs.

    Attributes:
        scenario (Scenario): family every function must belong to
        n_q (int): number of one-bit ADCs
        functions (tuple[MultivariatePolynomial, ...]): one function of the ``n_r`` antenna outputs per ADC
        thresholds (tuple[float, ...]): ADC thresholds, bit ``j`` is ``1{f_j(y) > t_j}``
        degree_bound (int | None): maximum degree, required for Scenario IV
    """

    model_config = ConfigDict(frozen=True)

    scenario: Scenario
    n_q: PositiveInt
    functions: tuple[MultivariatePolynomial, ...]
    thresholds: tuple[float, ...]
    degree_bound: PositiveInt | None = None

    @model_validator(mode="after")
    def _check_membership(self) -> "FrontendSpec":
        if len(self.functions) != self.n_q or len(self.thresholds) != self.n_q:
            raise ValueError(f"Expected {self.n_q} functions and thresholds.")
        if len({p.dim for p in self.functions}) != 1:
            raise ValueError("All functions must share one input dimension.")
        if not all(math.isfinite(t) for t in self.thresholds):
            raise ValueError("Thresholds must be finite.")
        if self.scenario is Scenario.BOUNDED_DEGREE and self.degree_bound is None:
            raise ValueError("Scenario IV requires a degree bound.")
        if not self.conforms_to(self.scenario, self.degree_bound):
            raise ScenarioViolationError(f"Functions are outside the Scenario {self.scenario} family.")
        return self

    @classmethod
    def projections(cls, n_r: int, thresholds: Sequence[float] | None = None) -> "FrontendSpec":
        """Scenario I front-end: one ADC per antenna on the raw output, thresholds default to 0."""
        functions = tuple(MultivariatePolynomial.projection(n_r, i) for i in range(n_r))
        t = tuple(float(v) for v in thresholds) if thresholds is not None else (0.0,) * n_r
        return cls(scenario=Scenario.PROJECTION, n_q=n_r, functions=functions, thresholds=t)

    @classmethod
    def isotropic(
        cls, linear: Sequence[Sequence[float]], quadratic: Sequence[float], thresholds: Sequence[float]
    ) -> "FrontendSpec":
        """Scenario V front-end from rows ``a_i`` and shared square coefficients ``q_i``."""
        functions = tuple(isotropic_function(a, q) for a, q in zip(linear, quadratic, strict=True))
        return cls(
            scenario=Scenario.ISOTROPIC_QUADRATIC,
            n_q=len(functions),
            functions=functions,
            thresholds=tuple(float(t) for t in thresholds),
        )

    @property
    def dim(self) -> int:
        """Number of antenna outputs the functions read."""
        return self.functions[0].dim

    @property
    def degree(self) -> int:
        """Largest function degree."""
        return max(p.degree for p in self.functions)

    def conforms_to(self, scenario: Scenario | str, degree_bound: int | None = None) -> bool:
        """Whether every function lies in the family of ``scenario`` (Scenario IV uses ``degree_bound``)."""
        match Scenario(scenario):
            case Scenario.PROJECTION:
                return self.n_q == self.dim and all(_is_projection(p, i) for i, p in enumerate(self.functions))
            case Scenario.LINEAR:
                return all(_is_homogeneous_linear(p) for p in self.functions)
            case Scenario.ISOTROPIC_QUADRATIC:
                return all(split_isotropic(p) is not None for p in self.functions)
            case Scenario.BOUNDED_DEGREE:
                return degree_bound is not None and self.degree <= degree_bound
            case Scenario.POLYNOMIAL:
                return True

    def as_scenario(self, scenario: Scenario | str, degree_bound: int | None = None) -> "FrontendSpec":
        """Re-declare the same functions under a larger family."""
        return FrontendSpec(
            scenario=Scenario(scenario),
            n_q=self.n_q,
            functions=self.functions,
            thresholds=self.thresholds,
            degree_bound=degree_bound,
        )

    def with_functions(self, functions: Sequence[MultivariatePolynomial]) -> "FrontendSpec":
        """Copy with new functions of the same family."""
        return FrontendSpec(
            scenario=self.scenario,
            n_q=self.n_q,
            functions=tuple(functions),
            thresholds=self.thresholds,
            degree_bound=self.degree_bound,
        )

    def with_thresholds(self, thresholds: Sequence[float]) -> "FrontendSpec":
        """Copy with new thresholds."""
        return FrontendSpec(
            scenario=self.scenario,
            n_q=self.n_q,
            functions=self.functions,
            thresholds=tuple(float(t) for t in thresholds),
            degree_bound=self.degree_bound,
        )


def eval_functions(spec: FrontendSpec, y: np.ndarray) -> np.ndarray:
    """Evaluate every analog function at the rows of ``y`` (shape ``(N, n_r)``), returning ``(N, n_q)``."""
    return np.column_stack([p.evaluate_batch(y) for p in spec.functions])


def quantize(w, t) -> np.ndarray:
    """
    One-bit threshold quantization, bit ``j`` is ``1`` iff ``w[j] > t[j]`` (equality gives ``0``).

    Accepts a single vector or a batch of row vectors.

    Raises:
        InvalidInputError: if the lengths of ``w`` and ``t`` differ
    """
    w = np.asarray(w, dtype=float)
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or w.shape[-1:] != t.shape:
        raise InvalidInputError(f"Cannot quantize values of shape {w.shape} with {t.size} thresholds.")
    return (w > t).astype(np.uint8)


def apply_frontend(spec: FrontendSpec, y) -> np.ndarray:
    """Run one antenna-output vector through the analog functions and the ADCs."""
    y = np.asarray(y, dtype=float)
    if y.shape != (spec.dim,):
        raise InvalidInputError(f"Expected an output vector of length {spec.dim}, got shape {y.shape}.")
    return quantize([p.evaluate(y) for p in spec.functions], spec.thresholds)


def apply_frontend_batch(spec: FrontendSpec, y: np.ndarray) -> np.ndarray:
    """Vectorized `apply_frontend` over the rows of an ``(N, n_r)`` array."""
    return quantize(eval_functions(spec, y), spec.thresholds)


def bits_to_key(bits) -> str:
    """Render a bit vector as a 0/1 string, ADC 1 first."""
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())


def key_to_bits(key: str) -> np.ndarray:
    """Parse a 0/1 string back into a bit vector."""
    if not key or set(key) - {"0", "1"}:
        raise InvalidInputError(f"Not a bit pattern: {key!r}.")
    return np.fromiter((c == "1" for c in key), dtype=np.uint8, count=len(key))


@dataclass(frozen=True)
class Partition1D:
    """
    Partition of the real line into intervals carrying output-symbol labels.

    Interval ``i`` is ``(boundaries[i - 1], boundaries[i]]``; the outermost intervals are unbounded.

    Attributes:
        boundaries (tuple[float, ...]): strictly increasing interval endpoints
        labels (tuple[int, ...]): symbol index in ``0 .. n_labels - 1`` per interval, every symbol used
        patterns (tuple[str, ...] | None): ADC bit pattern per symbol when induced by a front-end
    """

    boundaries: tuple[float, ...]
    labels: tuple[int, ...]
    patterns: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        b = np.asarray(self.boundaries, dtype=float)
        if not np.all(np.isfinite(b)):
            raise InvalidInputError("Partition boundaries must be finite.")
        if np.any(np.diff(b) <= 0):
            raise InvalidInputError(f"Partition boundaries must be strictly increasing: {self.boundaries}.")
        if len(self.labels) != len(self.boundaries) + 1:
            raise InvalidInputError(f"Expected {len(self.boundaries) + 1} labels, got {len(self.labels)}.")
        if set(self.labels) != set(range(max(self.labels) + 1)):
            raise InvalidInputError(f"Labels must use every symbol in 0..{max(self.labels)}: {self.labels}.")
        if self.patterns is not None and len(self.patterns) != self.n_labels:
            raise InvalidInputError("Expected one bit pattern per label.")

    @classmethod
    def from_boundaries(cls, boundaries: Sequence[float]) -> "Partition1D":
        """Partition with a distinct label per interval."""
        return cls(boundaries=tuple(float(b) for b in boundaries), labels=tuple(range(len(boundaries) + 1)))

    @property
    def n_intervals(self) -> int:
        """Number of intervals."""
        return len(self.labels)

    @property
    def n_labels(self) -> int:
        """Size of the output alphabet."""
        return max(self.labels) + 1

    @property
    def edges(self) -> np.ndarray:
        """Boundaries padded with ``-inf`` and ``+inf``."""
        return np.concatenate(([-np.inf], np.asarray(self.boundaries, dtype=float), [np.inf]))

    def locate(self, y) -> np.ndarray:
        """Interval index of every value in ``y``."""
        return np.searchsorted(np.asarray(self.boundaries, dtype=float), np.asarray(y, dtype=float), side="left")

    def label_of(self, y) -> np.ndarray:
        """Output symbol of every value in ``y``."""
        return np.asarray(self.labels)[self.locate(y)]


def real_roots(coefficients: np.ndarray, threshold: float = 0.0) -> list[float]:
    """Real roots of ``c0 + c1 y + c2 y^2 = threshold`` for ascending coefficients of degree at most two."""
    c = np.zeros(3)
    c[: coefficients.size] = coefficients
    c0, c1, c2 = c[0] - threshold, c[1], c[2]
    if c2 == 0.0:
        return [-c0 / c1] if c1 != 0.0 else []
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc < 0.0:
        return []
    q = -0.5 * (c1 + math.copysign(math.sqrt(disc), c1))
    if q == 0.0:
        return [0.0]
    return [q / c2, c0 / q]


def induced_partition_1d(spec: FrontendSpec, domain: tuple[float, float] | None = None) -> Partition1D:
    """
    Interval partition of a scalar output induced by comparators of degree at most two.

    Boundaries are the real roots of ``f_i(y) - t_i`` inside ``domain``; adjacent intervals with the same
    bit pattern are merged and labels are numbered by first appearance from the left.

    Raises:
        InvalidInputError: if the front-end reads more than one output
        UnsupportedFamilyError: if a function has degree above two
    """
    if spec.dim != 1:
        raise InvalidInputError(f"Induced 1-D partitions need scalar outputs, got dimension {spec.dim}.")
    if spec.degree > 2:
        raise UnsupportedFamilyError(f"Comparators of degree {spec.degree} are not supported, at most 2.")

    lo, hi = domain if domain is not None else (-math.inf, math.inf)
    roots = sorted(
        r
        for p, t in zip(spec.functions, spec.thresholds)
        for r in real_roots(p.univariate_coefficients(), t)
        if lo < r < hi
    )
    unique: list[float] = []
    for r in roots:
        if not unique or r - unique[-1] > ROOT_TOL:
            unique.append(r)

    if unique:
        left = unique[0] - 1.0 if math.isinf(lo) else 0.5 * (lo + unique[0])
        right = unique[-1] + 1.0 if math.isinf(hi) else 0.5 * (unique[-1] + hi)
        interior = np.array([left, *(0.5 * (a + b) for a, b in itertools.pairwise(unique)), right])
    else:
        interior = np.array([0.0 if math.isinf(lo) or math.isinf(hi) else 0.5 * (lo + hi)])
    patterns = [bits_to_key(bits) for bits in apply_frontend_batch(spec, interior[:, None])]

    boundaries: list[float] = []
    merged = [patterns[0]]
    for b, pattern in zip(unique, patterns[1:]):
        if pattern != merged[-1]:
            boundaries.append(b)
            merged.append(pattern)

    order: dict[str, int] = {}
    labels = tuple(order.setdefault(pattern, len(order)) for pattern in merged)
    logger.debug("Induced partition: boundaries=%s labels=%s", boundaries, labels)
    return Partition1D(boundaries=tuple(boundaries), labels=labels, patterns=tuple(order))


def realize_partition(
    boundaries: Sequence[float],
    family: Literal["linear", "quadratic"],
    layout: Literal["mixed", "all-quadratic"] = "mixed",
) -> FrontendSpec:
    """
    Build a scalar comparator bank whose induced partition has the given boundaries.

    ``linear`` uses one comparator ``y > b`` per boundary (n boundaries, n + 1 labels). ``quadratic`` with the
    ``mixed`` layout takes ``2n - 1`` boundaries and uses ``n - 1`` window comparators ``b_i < y < b_(i+n)`` plus
    ``y > b_(n-1)``, giving 2n distinct labels; ``all-quadratic`` takes ``2n`` boundaries and ``n`` windows, and
    the two outermost intervals share a label.

    Raises:
        InvalidInputError: if the boundary count does not fit the layout
    """
    b = [float(v) for v in boundaries]
    if not b or any(x >= y for x, y in itertools.pairwise(b)):
        raise InvalidInputError(f"Boundaries must be a non-empty increasing sequence: {b}.")

    if family == "linear":
        functions = [MultivariatePolynomial.projection(1, 0)] * len(b)
        return FrontendSpec(scenario=Scenario.LINEAR, n_q=len(b), functions=tuple(functions), thresholds=tuple(b))

    def window(lo: float, hi: float) -> tuple[MultivariatePolynomial, float]:
        # (lo + hi) y - y^2 > lo * hi  <=>  lo < y < hi
        return isotropic_function([lo + hi], -1.0), lo * hi

    if layout == "mixed":
        if len(b) % 2 == 0:
            raise InvalidInputError(f"The mixed layout needs an odd number of boundaries, got {len(b)}.")
        n = (len(b) + 1) // 2
        bank = [window(b[i], b[i + n]) for i in range(n - 1)] + [(MultivariatePolynomial.projection(1, 0), b[n - 1])]
    else:
        if len(b) % 2:
            raise InvalidInputError(f"The all-quadratic layout needs an even number of boundaries, got {len(b)}.")
        n = len(b) // 2
        bank = [window(b[i], b[i + n]) for i in range(n)]

    return FrontendSpec(
        scenario=Scenario.ISOTROPIC_QUADRATIC,
        n_q=len(bank),
        functions=tuple(f for f, _ in bank),
        thresholds=tuple(t for _, t in bank),
    )


class CellConstraint(BaseModel):
    """Strict sign condition ``sign * poly(y) > 0``."""

    model_config = ConfigDict(frozen=True)

    poly: MultivariatePolynomial
    sign: Literal[1, -1] = 1


class Cell(BaseModel):
    """A region given as an intersection of sign constraints, carrying its index ``k``."""

    model_config = ConfigDict(frozen=True)

    index: PositiveInt
    constraints: tuple[CellConstraint, ...]

    @property
    def is_affine(self) -> bool:
        """Whether every constraint has degree at most one."""
        return all(c.poly.degree <= 1 for c in self.constraints)


def _affine_normal(p: MultivariatePolynomial) -> np.ndarray:
    return np.array([p.coefficient(tuple(int(j == i) for j in range(p.dim))) for i in range(p.dim)])


class LabeledPartitionRd(BaseModel):
    """
    Labeled partition of ``R^dim`` into cells with indices in ``1 .. 2**n_q``.

    Attributes:
        dim (int): dimension of the partitioned space
        n_q (int): number of index bits
        cells (tuple[Cell, ...]): disjoint cells with distinct indices
    """

    model_config = ConfigDict(frozen=True)

    dim: PositiveInt
    n_q: PositiveInt
    cells: tuple[Cell, ...]

    @model_validator(mode="after")
    def _check_cells(self) -> "LabeledPartitionRd":
        indices = [cell.index for cell in self.cells]
        if len(set(indices)) != len(indices):
            raise ValueError(f"Cell indices must be distinct: {indices}.")
        if max(indices, default=1) > 2**self.n_q:
            raise ValueError(f"Cell index {max(indices)} does not fit in {self.n_q} bits.")
        if any(c.poly.dim != self.dim for cell in self.cells for c in cell.constraints):
            raise ValueError(f"Every constraint must be a polynomial in {self.dim} variables.")
        return self

    @classmethod
    def from_intervals(cls, boundaries: Sequence[float]) -> "LabeledPartitionRd":
        """1-D partition with cell ``k`` the ``k``-th interval from the left."""
        return cls.rectangular([boundaries])

    @classmethod
    def rectangular(cls, cuts: Sequence[Sequence[float]]) -> "LabeledPartitionRd":
        """Axis-aligned grid partition; cells are numbered from 1 in row-major order (last axis fastest)."""
        dim = len(cuts)
        axes = [sorted(float(c) for c in axis_cuts) for axis_cuts in cuts]
        cells = []
        for k, slots in enumerate(itertools.product(*(range(len(a) + 1) for a in axes)), start=1):
            constraints = []
            for axis, slot in enumerate(slots):
                unit = [float(j == axis) for j in range(dim)]
                if slot > 0:
                    constraints.append(CellConstraint(poly=MultivariatePolynomial.linear(unit, -axes[axis][slot - 1])))
                if slot < len(axes[axis]):
                    poly = MultivariatePolynomial.linear(unit, -axes[axis][slot])
                    constraints.append(CellConstraint(poly=poly, sign=-1))
            cells.append(Cell(index=k, constraints=tuple(constraints)))
        n_q = max(1, math.ceil(math.log2(len(cells))))
        return cls(dim=dim, n_q=n_q, cells=tuple(cells))

    @classmethod
    def random_rectangular(cls, dim: int, max_cuts: int, seed: int) -> "LabeledPartitionRd":
        """Seeded rectangular partition with 1 .. ``max_cuts`` uniform cuts in [-1, 1] per axis."""
        rng = derive_rng(seed, dim, max_cuts)
        cuts = [np.sort(rng.uniform(-1.0, 1.0, size=rng.integers(1, max_cuts + 1))) for _ in range(dim)]
        return cls.rectangular(cuts)

    def margins(self, y: np.ndarray) -> np.ndarray:
        """
        Smallest signed normalized constraint value per cell, shape ``(N, n_cells)``.

        Positive entries mean the point is strictly inside the cell; for affine constraints the value is the
        Euclidean distance to the nearest facet hyperplane.
        """
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if y.shape[1] != self.dim:
            raise InvalidInputError(f"Expected points of dimension {self.dim}, got shape {y.shape}.")
        result = np.full((y.shape[0], len(self.cells)), np.inf)
        for c, cell in enumerate(self.cells):
            for constraint in cell.constraints:
                scale = np.linalg.norm(_affine_normal(constraint.poly)) if constraint.poly.degree <= 1 else 1.0
                value = constraint.sign * constraint.poly.evaluate_batch(y) / (scale or 1.0)
                result[:, c] = np.minimum(result[:, c], value)
        return result

    def locate(self, y) -> Cell:
        """
        Cell strictly containing the point ``y``.

        Raises:
            BoundaryAmbiguityError: if ``y`` is within the boundary tolerance of its cell's boundary
            InvalidInputError: if ``y`` lies in no cell
        """
        margins = self.margins(np.asarray(y, dtype=float).reshape(1, -1))[0]
        best = int(np.argmax(margins))
        if margins[best] <= BOUNDARY_TOL:
            if margins[best] > -BOUNDARY_TOL:
                raise BoundaryAmbiguityError(f"Point {y} lies on a partition boundary.")
            raise InvalidInputError(f"Point {y} lies outside every cell.")
        return self.cells[best]

    def check_disjoint(self, samples: int, radius: float, seed: int) -> None:
        """
        Sample points in ``[-radius, radius]^dim`` and verify no point lies in two cells.

        Raises:
            InvalidInputError: if a sampled point lies strictly inside two cells
        """
        y = derive_rng(seed, samples).uniform(-radius, radius, size=(samples, self.dim))
        overlaps = np.count_nonzero(self.margins(y) > 0.0, axis=1)
        if np.any(overlaps > 1):
            raise InvalidInputError(f"Cells overlap at {y[np.argmax(overlaps)]}.")


def _index_signs(indices: np.ndarray, j: int) -> np.ndarray:
    return np.where((indices - 1) >> j & 1, 1.0, -1.0)


def distance_sign_features(part: LabeledPartitionRd, y: np.ndarray, strict: bool = True) -> np.ndarray:
    """
    All distance-sign functions at the rows of ``y``, shape ``(N, n_q)``.

    Column ``j`` is the distance to the containing cell's boundary, positive iff bit ``j`` of ``k - 1`` is set
    (least significant bit first). With ``strict=False`` points on a boundary map to ``0``, the continuous
    extension of the functions.

    Raises:
        UnsupportedFamilyError: if a cell has a nonlinear constraint
        BoundaryAmbiguityError: in strict mode, if a point is within the boundary tolerance of a boundary
        InvalidInputError: in strict mode, if a point lies outside every cell
    """
    if not all(cell.is_affine for cell in part.cells):
        raise UnsupportedFamilyError("Boundary distances are only exact for cells with affine constraints.")
    margins = part.margins(y)
    best = np.argmax(margins, axis=1)
    distance = margins[np.arange(margins.shape[0]), best]
    if strict and np.any(distance <= BOUNDARY_TOL):
        bad = int(np.argmin(distance))
        if distance[bad] > -BOUNDARY_TOL:
            raise BoundaryAmbiguityError(f"Point {np.atleast_2d(y)[bad]} lies on a partition boundary.")
        raise InvalidInputError(f"Point {np.atleast_2d(y)[bad]} lies outside every cell.")
    distance = np.clip(distance, 0.0, None)
    indices = np.array([cell.index for cell in part.cells])[best]
    return np.column_stack([_index_signs(indices, j) * distance for j in range(part.n_q)])


def distance_sign_function(part: LabeledPartitionRd, j: int, y) -> float:
    """
    Signed distance from ``y`` to its cell boundary, positive iff bit ``j`` of the cell index ``k - 1`` is set.

    Raises:
        InvalidInputError: if ``j`` is not a valid bit position
        UnsupportedFamilyError: if the containing cell has a nonlinear constraint
        BoundaryAmbiguityError: if ``y`` lies on a boundary up to tolerance
    """
    if not 0 <= j < part.n_q:
        raise InvalidInputError(f"Bit position {j} outside 0..{part.n_q - 1}.")
    cell = part.locate(y)
    if not cell.is_affine:
        raise UnsupportedFamilyError("Boundary distances are only exact for cells with affine constraints.")
    point = np.asarray(y, dtype=float).reshape(1, -1)
    distance = float(part.margins(point)[0, part.cells.index(cell)])
    return float(_index_signs(np.array([cell.index]), j)[0]) * distance


@dataclass(frozen=True)
class BernsteinPolynomial:
    """
    Tensor-product Bernstein polynomial on ``[-half_width, half_width]^dim``.

    Evaluated in the Bernstein basis; `to_polynomial` expands it into monomials, which is only well
    conditioned for low degrees.
    """

    degree: int
    half_width: float
    node_values: np.ndarray

    @property
    def dim(self) -> int:
        """Number of variables."""
        return self.node_values.ndim

    def _basis(self, y: np.ndarray) -> np.ndarray:
        t = np.clip((y + self.half_width) / (2.0 * self.half_width), 0.0, 1.0)
        return stats.binom.pmf(np.arange(self.degree + 1), self.degree, t[..., None])

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        """Evaluate at the rows of an ``(N, dim)`` array."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if y.shape[1] != self.dim:
            raise InvalidInputError(f"Expected points of dimension {self.dim}, got shape {y.shape}.")
        basis = self._basis(y)
        if self.dim == 1:
            return basis[:, 0, :] @ self.node_values
        return np.einsum("ni,nj,ij->n", basis[:, 0, :], basis[:, 1, :], self.node_values)

    def to_polynomial(self) -> MultivariatePolynomial:
        """Expand into a `MultivariatePolynomial` in the original variables."""
        n, scale = self.degree, 1.0 / (2.0 * self.half_width)
        # t = 1/2 + y / (2L) and 1 - t = 1/2 - y / (2L)
        factors = [
            math.comb(n, k) * npoly.polymul(npoly.polypow([0.5, scale], k), npoly.polypow([0.5, -scale], n - k))
            for k in range(n + 1)
        ]
        if self.dim == 1:
            coefficients = sum(value * factors[k] for k, value in enumerate(self.node_values))
            return MultivariatePolynomial.univariate(coefficients)
        grid = sum(
            self.node_values[k, m] * np.outer(factors[k], factors[m])
            for k in range(n + 1)
            for m in range(n + 1)
        )
        terms = tuple(Term(exps=(i, j), coef=float(c)) for (i, j), c in np.ndenumerate(grid))
        return MultivariatePolynomial(dim=2, terms=terms)


@dataclass(frozen=True)
class BernsteinFit:
    """Bernstein approximation with its sup-norm error and sign agreement on a test grid."""

    polynomial: BernsteinPolynomial
    sup_error: float
    sign_agreement: float


def _grid(half_width: float, points: int, dim: int) -> np.ndarray:
    axis = np.linspace(-half_width, half_width, points)
    return np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)


def bernstein_approximate(
    f: Callable[[np.ndarray], np.ndarray],
    degree: int,
    half_width: float,
    dim: int = 1,
    test_grid: int = 1024,
) -> BernsteinFit:
    """
    Approximate ``f`` on ``[-half_width, half_width]^dim`` by its Bernstein polynomial of the given degree.

    Args:
        f (Callable): vectorized function mapping an ``(N, dim)`` array to ``N`` values
        degree (int): polynomial degree per axis
        half_width (float): half side length ``L`` of the approximation box
        dim (int): 1 or 2
        test_grid (int): equispaced test points per axis

    Returns:
        BernsteinFit with the max absolute error and the fraction of grid points where the signs agree

    Raises:
        UnsupportedDimensionError: if ``dim`` exceeds 2
    """
    if dim not in (1, 2):
        raise UnsupportedDimensionError(f"Bernstein approximation supports dimensions 1 and 2, got {dim}.")
    if degree < 1 or half_width <= 0:
        raise InvalidInputError("Bernstein approximation needs degree >= 1 and a positive half width.")

    nodes = _grid(half_width, degree + 1, dim)
    values = np.asarray(f(nodes), dtype=float).reshape((degree + 1,) * dim)
    bernstein = BernsteinPolynomial(degree=degree, half_width=half_width, node_values=values)

    points = _grid(half_width, test_grid, dim)
    approx, exact = bernstein.evaluate(points), np.asarray(f(points), dtype=float)
    fit = BernsteinFit(
        polynomial=bernstein,
        sup_error=float(np.max(np.abs(approx - exact))),
        sign_agreement=float(np.mean(np.sign(approx) == np.sign(exact))),
    )
    logger.debug("Bernstein degree %d: sup_error=%.3g sign_agreement=%.4f", degree, fit.sup_error, fit.sign_agreement)
    return fit


def choose_truncation_L(gamma_y: float, n_q: int, eps: float) -> float:  # noqa: N802
    """Smallest truncation level ``L`` with ``gamma_y * n_q / L <= eps``."""
    if gamma_y <= 0 or n_q <= 0 or eps <= 0:
        raise InvalidInputError("gamma_y, n_q and eps must be positive.")
    return gamma_y * n_q / eps


def estimate_gamma_y(
    channel: ChannelModel,
    samples: int = 100_000,
    seed: int = 0,
    inputs: Literal["gaussian", "antipodal"] = "gaussian",
) -> float:
    """
    Monte-Carlo estimate of ``(1/n_r) sum_i E|Y_i|``.

    Inputs are iid per antenna, either ``N(0, P)`` or uniform on ``+-sqrt(P)``.
    """
    rng = derive_rng(seed, samples)
    scale = math.sqrt(channel.power)
    if inputs == "gaussian":
        x = rng.normal(0.0, scale, size=(samples, channel.n_t))
    else:
        x = scale * rng.choice([-1.0, 1.0], size=(samples, channel.n_t))
    y = apply_channel(channel, x, rng)
    return float(np.mean(np.abs(y)))


def binary_entropy(p: float) -> float:
    """Binary entropy in bits."""
    return float(stats.bernoulli.entropy(p) / math.log(2.0)) if 0.0 < p < 1.0 else 0.0


def truncation_slack(gamma_y: float, n_r: int, n_q: int, L: float) -> float:  # noqa: N803
    """
    Rate lost by truncating the outputs to ``[-n_r L, n_r L]``.

    Each tail probability is bounded by Markov's inequality, ``P(|Y_i| > n_r L) <= gamma_y / L``, giving
    ``n_r h_b(min(1/2, gamma_y / L)) + gamma_y n_q / L``.
    """
    if L <= 0:
        raise InvalidInputError("The truncation level must be positive.")
    return n_r * binary_entropy(min(0.5, gamma_y / L)) + gamma_y * n_q / L
