"""Quantization-region combinatorics: region counts, hyperplane arrangements and high-SNR code constructions."""

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, PositiveInt, model_validator
from scipy.linalg import null_space
from scipy.optimize import linprog, minimize

from qmimo.channel import ChannelModel
from qmimo.errors import (
    ConstructionFailureError,
    DegenerateArrangementError,
    InsufficientADCsError,
    InvalidCodeError,
    InvalidInputError,
    ScenarioViolationError,
    SingularFeatureMatrixError,
)
from qmimo.frontend import (
    FrontendSpec,
    Scenario,
    apply_frontend_batch,
    bits_to_key,
    key_to_bits,
    split_isotropic,
)
from qmimo.polynomial import MultivariatePolynomial, monomial_exponents
from qmimo.seeding import derive_rng

logger = logging.getLogger(__name__)

NORMAL_TOL = 1e-12
GENERAL_POSITION_TOL = 1e-10
CELL_RADIUS_TOL = 1e-9
MAX_REDRAWS = 100
MAX_ORACLE_HYPERPLANES = 16
MAX_SHATTER_POINTS = 12
REPRESENTATIVE_REACH = 1.5
ANCHOR_STEP = 0.5
FEATURE_COND_LIMIT = 1e10


class Hyperplane(BaseModel):
    """The affine hyperplane ``{z : <normal, z> = offset}``; its positive side is ``<normal, z> > offset``."""

    model_config = ConfigDict(frozen=True)

    normal: tuple[float, ...]
    offset: float = 0.0

    @model_validator(mode="after")
    def _check_normal(self) -> "Hyperplane":
        if np.linalg.norm(self.normal) <= NORMAL_TOL:
            raise ValueError("Hyperplane normal must be nonzero.")
        return self

    @property
    def dim(self) -> int:
        """Ambient dimension."""
        return len(self.normal)

    def side(self, z: np.ndarray) -> np.ndarray:
        """``+1`` on the positive side, ``-1`` otherwise, for every row of ``z``."""
        return np.where(np.atleast_2d(z) @ np.asarray(self.normal) > self.offset, 1, -1)


class Arrangement(BaseModel):
    """
    Finite set of affine hyperplanes in ``R^dim``.

    Attributes:
        dim (int): ambient dimension
        hyperplanes (tuple[Hyperplane, ...]): the hyperplanes, in comparator order
    """

    model_config = ConfigDict(frozen=True)

    dim: PositiveInt
    hyperplanes: tuple[Hyperplane, ...]

    @model_validator(mode="after")
    def _check_dims(self) -> "Arrangement":
        if any(h.dim != self.dim for h in self.hyperplanes):
            raise ValueError(f"Every hyperplane must live in R^{self.dim}.")
        return self

    @classmethod
    def from_arrays(cls, normals, offsets=None) -> "Arrangement":
        """Create an arrangement from an ``(n, dim)`` normal matrix and optional offsets."""
        normals = np.atleast_2d(np.asarray(normals, dtype=float))
        offsets = np.zeros(normals.shape[0]) if offsets is None else np.asarray(offsets, dtype=float)
        hyperplanes = tuple(
            Hyperplane(normal=tuple(float(v) for v in a), offset=float(b)) for a, b in zip(normals, offsets)
        )
        return cls(dim=normals.shape[1], hyperplanes=hyperplanes)

    @classmethod
    def from_frontend(cls, spec: FrontendSpec) -> "Arrangement":
        """
        Lift Scenario-V comparators ``a . y + q ||y||^2 > t`` to hyperplanes ``<(a, q), z> > t`` in ``R^(n_r + 1)``.

        Raises:
            ScenarioViolationError: if a function is outside the Scenario-V span
        """
        rows, offsets = [], []
        for p, t in zip(spec.functions, spec.thresholds):
            split = split_isotropic(p)
            if split is None:
                raise ScenarioViolationError("Only Scenario-V comparators lift to hyperplanes.")
            linear, quadratic = split
            rows.append([*linear, quadratic])
            offsets.append(t)
        return cls.from_arrays(rows, offsets)

    def to_frontend(self) -> FrontendSpec:
        """Scenario-V comparator bank on ``R^(dim - 1)`` equivalent to the lifted hyperplanes."""
        return FrontendSpec.isotropic(
            linear=[a[:-1] for a in self.normals], quadratic=self.normals[:, -1], thresholds=self.offsets
        )

    @property
    def n(self) -> int:
        """Number of hyperplanes."""
        return len(self.hyperplanes)

    @property
    def normals(self) -> np.ndarray:
        """``(n, dim)`` matrix of normals."""
        return np.array([h.normal for h in self.hyperplanes], dtype=float).reshape(self.n, self.dim)

    @property
    def offsets(self) -> np.ndarray:
        """Offsets as an array."""
        return np.array([h.offset for h in self.hyperplanes], dtype=float)

    @property
    def central(self) -> bool:
        """Whether every hyperplane passes through the origin."""
        return bool(np.all(self.offsets == 0.0))

    @property
    def general_position(self) -> bool:
        """
        Every ``min(n, dim)`` normals are linearly independent and, unless central, no ``dim + 1`` hyperplanes meet.

        Normals are scaled to unit length before the determinant tolerance is applied.
        """
        normals = self.normals / np.linalg.norm(self.normals, axis=1, keepdims=True)
        size = min(self.n, self.dim)
        for subset in itertools.combinations(range(self.n), size):
            if np.linalg.svd(normals[list(subset)], compute_uv=False)[-1] <= GENERAL_POSITION_TOL:
                return False
        if self.central or self.n <= self.dim:
            return True
        augmented = np.column_stack([normals, -self.offsets / np.linalg.norm(self.normals, axis=1)])
        return all(
            abs(np.linalg.det(augmented[list(subset)])) > GENERAL_POSITION_TOL
            for subset in itertools.combinations(range(self.n), self.dim + 1)
        )

    def shifted(self, direction: Sequence[float]) -> "Arrangement":
        """Translate every hyperplane by the vector ``direction``."""
        return Arrangement.from_arrays(self.normals, self.offsets + self.normals @ np.asarray(direction, dtype=float))

    def sign_vectors(self, z: np.ndarray) -> np.ndarray:
        """Side of every hyperplane for each row of ``z``, shape ``(N, n)``."""
        return np.where(np.atleast_2d(z) @ self.normals.T > self.offsets, 1, -1)

    def vertices(self) -> np.ndarray:
        """Intersection points of every ``dim`` hyperplanes (empty when ``n < dim``)."""
        if self.n < self.dim:
            return np.empty((0, self.dim))
        normals, offsets = self.normals, self.offsets
        return np.array(
            [
                np.linalg.solve(normals[list(s)], offsets[list(s)])
                for s in itertools.combinations(range(self.n), self.dim)
            ]
        )


def random_arrangement(dim: int, n: int, seed: int, central: bool = False) -> Arrangement:
    """
    Seeded generic arrangement: normals uniform on the unit sphere, offsets uniform in [-1, 1] (0 when central).

    Raises:
        DegenerateArrangementError: if no draw is in general position within the redraw budget
    """
    rng = derive_rng(seed, dim, n, int(central))
    for attempt in range(MAX_REDRAWS):
        normals = rng.normal(size=(n, dim))
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        offsets = np.zeros(n) if central else rng.uniform(-1.0, 1.0, size=n)
        arrangement = Arrangement.from_arrays(normals, offsets)
        if arrangement.general_position:
            return arrangement
        logger.warning("Arrangement draw %d (dim=%d, n=%d) not in general position, redrawing", attempt, dim, n)
    raise DegenerateArrangementError(f"No generic arrangement of {n} hyperplanes in R^{dim} after {MAX_REDRAWS} draws.")


@dataclass(frozen=True)
class RegionCounts:
    """
    High-SNR region counts for ``n_q`` Scenario-V comparators on a rank-``rank`` channel.

    Attributes:
        stated (int): ``sum_{i <= rank+1} C(n_q, i) - C(n_q - 1, rank)``, the count with the stated subtraction
        alpha (int): ``2 sum_{i <= rank} C(n_q - 1, i)``, the central-arrangement count
        corrected (int): ``sum_{i <= rank+1} C(n_q, i) - C(n_q - 1, rank + 1)``, equal to ``alpha``
    """

    stated: int
    alpha: int
    corrected: int

    @property
    def stated_matches(self) -> bool:
        """Whether the stated count agrees with ``alpha``."""
        return self.stated == self.alpha


def total_cells_formula(dim: int, n: int) -> int:
    """Cells of ``n`` generic affine hyperplanes in ``R^dim``."""
    return sum(math.comb(n, i) for i in range(dim + 1))


def central_cells_formula(dim: int, n: int) -> int:
    """Cells of ``n`` generic central hyperplanes in ``R^dim``."""
    return 2 * sum(math.comb(n - 1, i) for i in range(dim)) if n else 1


def bounded_cells_formula(dim: int, n: int) -> tuple[int, int]:
    """Bounded cells of ``n`` generic hyperplanes in ``R^dim``: ``C(n-1, dim)`` and the stated ``C(n-1, dim-1)``."""
    if dim < 1 or n < 1:
        raise InvalidInputError("dim and n must be positive.")
    return math.comb(n - 1, dim), math.comb(n - 1, dim - 1)


def count_regions(rank: int, n_q: int) -> RegionCounts:
    """Region counts of Scenario-V comparators; logs a warning where the stated count differs from ``alpha``."""
    if rank < 1 or n_q < 1:
        raise InvalidInputError("rank and n_q must be positive.")
    counts = RegionCounts(
        stated=total_cells_formula(rank + 1, n_q) - math.comb(n_q - 1, rank),
        alpha=central_cells_formula(rank + 1, n_q),
        corrected=total_cells_formula(rank + 1, n_q) - math.comb(n_q - 1, rank + 1),
    )
    if not counts.stated_matches:
        logger.warning(
            "Region count for rank=%d n_q=%d: stated %d, central %d", rank, n_q, counts.stated, counts.alpha
        )
    return counts


def cell_interior_point(normals: np.ndarray, offsets: np.ndarray, signs: Sequence[int]) -> np.ndarray | None:
    """
    Chebyshev center of ``{z : signs_i (<a_i, z> - b_i) > 0}``, or ``None`` when the cell is empty.

    The inscribed radius is capped at 1; a cell exists iff the optimal radius exceeds the tolerance.
    """
    normals = np.atleast_2d(normals)
    signed = -np.asarray(signs, dtype=float)[:, None] * normals
    a_ub = np.column_stack([signed, np.linalg.norm(normals, axis=1)])
    b_ub = -np.asarray(signs, dtype=float) * offsets
    cost = np.zeros(normals.shape[1] + 1)
    cost[-1] = -1.0
    bounds = [(None, None)] * normals.shape[1] + [(None, 1.0)]
    result = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if result.status != 0 or result.x[-1] <= CELL_RADIUS_TOL:
        return None
    return result.x[:-1]


def cell_is_bounded(normals: np.ndarray, signs: Sequence[int]) -> bool:
    """A nonempty cell is bounded iff its recession cone ``{d : signs_i <a_i, d> >= 0}`` is ``{0}``."""
    normals = np.atleast_2d(normals)
    signed = np.asarray(signs, dtype=float)[:, None] * normals
    if np.linalg.matrix_rank(normals) < normals.shape[1]:
        return False
    result = linprog(
        -signed.sum(axis=0),
        A_ub=-signed,
        b_ub=np.zeros(len(signs)),
        bounds=[(-1.0, 1.0)] * normals.shape[1],
        method="highs",
    )
    return result.status == 0 and -result.fun <= CELL_RADIUS_TOL


@dataclass(frozen=True)
class CellEnumeration:
    """Cells found by exhaustive sign-vector feasibility tests, sign vectors sorted lexicographically."""

    total_cells: int
    bounded_cells: int
    sign_vectors: tuple[tuple[int, ...], ...]
    interior_points: tuple[tuple[float, ...], ...]


def _classify(normals: np.ndarray, offsets: np.ndarray, signs: tuple[int, ...]) -> tuple[np.ndarray | None, bool]:
    point = cell_interior_point(normals, offsets, signs)
    if point is None:
        return None, False
    return point, cell_is_bounded(normals, signs)


def enumerate_cells_oracle(
    arr: Arrangement, samples_per_cell_check: int = 0, seed: int = 0, jobs: int = 1
) -> CellEnumeration:
    """
    Enumerate the cells of an arrangement by testing all ``2**n`` sign vectors with linear programs.

    Args:
        arr (Arrangement): arrangement in general position
        samples_per_cell_check (int): when positive, points sampled in each cell's inscribed ball must
            reproduce its sign vector
        seed (int): root seed of the sampling check
        jobs (int): joblib worker cap

    Raises:
        DegenerateArrangementError: if the arrangement is not in general position or the sampling check fails
        InvalidInputError: for more than 16 hyperplanes
    """
    if arr.n > MAX_ORACLE_HYPERPLANES:
        raise InvalidInputError(f"The oracle enumerates at most {MAX_ORACLE_HYPERPLANES} hyperplanes, got {arr.n}.")
    if not arr.general_position:
        raise DegenerateArrangementError("Arrangement is not in general position; perturb it or draw a new seed.")

    normals, offsets = arr.normals, arr.offsets
    candidates = list(itertools.product((-1, 1), repeat=arr.n))
    results = Parallel(n_jobs=jobs)(delayed(_classify)(normals, offsets, signs) for signs in candidates)

    cells = [(signs, point, bounded) for signs, (point, bounded) in zip(candidates, results) if point is not None]
    if samples_per_cell_check > 0:
        for index, (signs, point, _) in enumerate(cells):
            radius = max(cell_radius(normals, offsets, signs, point), CELL_RADIUS_TOL)
            rng = derive_rng(seed, index)
            direction = rng.normal(size=(samples_per_cell_check, arr.dim))
            direction /= np.linalg.norm(direction, axis=1, keepdims=True)
            samples = point + 0.5 * radius * rng.uniform(size=(samples_per_cell_check, 1)) * direction
            if np.any(arr.sign_vectors(samples) != np.asarray(signs)):
                raise DegenerateArrangementError(f"Samples leave cell {signs}; the arrangement is near-degenerate.")

    enumeration = CellEnumeration(
        total_cells=len(cells),
        bounded_cells=sum(bounded for _, _, bounded in cells),
        sign_vectors=tuple(signs for signs, _, _ in cells),
        interior_points=tuple(tuple(float(v) for v in point) for _, point, _ in cells),
    )
    logger.debug(
        "Oracle on %d hyperplanes in R^%d: %d cells, %d bounded", arr.n, arr.dim, len(cells), enumeration.bounded_cells
    )
    return enumeration


def cell_radius(normals: np.ndarray, offsets: np.ndarray, signs: Sequence[int], point: np.ndarray) -> float:
    """Distance from ``point`` to the nearest hyperplane."""
    values = np.asarray(signs) * (normals @ point - offsets) / np.linalg.norm(normals, axis=1)
    return float(values.min())


def lift_paraboloid(x) -> np.ndarray:
    """Append ``||x||^2`` to a point, or to every row of a batch."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("Points to lift must be finite.")
    return np.concatenate([x, np.sum(x**2, axis=-1, keepdims=True)], axis=-1)


def _decimal_key(bits: str) -> int:
    return int(bits, 2)


class RegionCode(BaseModel):
    """
    One-shot high-SNR code: one constellation point per decodable quantization region.

    The code is defined on the identity channel of dimension ``frontend.dim``; pattern keys are 0/1 strings with
    ADC 1 first.

    Attributes:
        constellation (tuple): ``M`` channel-input points
        frontend (FrontendSpec): comparator bank
        pattern_map (dict[str, int]): bit pattern -> message index in ``0 .. M - 1``
    """

    model_config = ConfigDict(frozen=True)

    constellation: tuple[tuple[float, ...], ...]
    frontend: FrontendSpec
    pattern_map: dict[str, int]

    @model_validator(mode="after")
    def _check_separable(self) -> "RegionCode":
        if sorted(self.pattern_map.values()) != list(range(len(self.constellation))):
            raise InvalidCodeError("pattern_map must assign every message index exactly once.")
        if any(len(key) != self.frontend.n_q for key in self.pattern_map):
            raise InvalidCodeError(f"Patterns must have {self.frontend.n_q} bits.")
        if self.constellation:
            points = self.points
            if points.shape[1] != self.frontend.dim:
                raise InvalidCodeError(f"Points have dimension {points.shape[1]}, front-end reads {self.frontend.dim}.")
            decoded = [self.pattern_map.get(bits_to_key(b)) for b in apply_frontend_batch(self.frontend, points)]
            if decoded != list(range(len(points))):
                raise InvalidCodeError("Constellation is not separable by the front-end without noise.")
        return self

    @classmethod
    def from_constellation(cls, constellation, frontend: FrontendSpec) -> "RegionCode":
        """Assign each point the pattern it produces without noise."""
        points = np.asarray(constellation, dtype=float).reshape(len(constellation), frontend.dim)
        keys = [bits_to_key(bits) for bits in apply_frontend_batch(frontend, points)]
        if len(set(keys)) != len(keys):
            raise InvalidCodeError("Two constellation points share a bit pattern.")
        return cls(
            constellation=tuple(tuple(float(v) for v in p) for p in points),
            frontend=frontend,
            pattern_map={key: m for m, key in enumerate(keys)},
        )

    @property
    def points(self) -> np.ndarray:
        """``(M, dim)`` constellation array."""
        return np.asarray(self.constellation, dtype=float).reshape(len(self.constellation), -1)

    @property
    def size(self) -> int:
        """Number of messages M."""
        return len(self.constellation)

    @property
    def average_power(self) -> float:
        """Per-dimension average power ``(1/dim) mean_m ||x_m||^2`` under uniform messages."""
        return float(np.mean(np.sum(self.points**2, axis=1)) / self.points.shape[1])

    def pattern_matrix(self) -> np.ndarray:
        """``(M, n_q)`` bit patterns ordered by message index."""
        by_message = sorted(self.pattern_map.items(), key=lambda item: item[1])
        return np.array([key_to_bits(key) for key, _ in by_message], dtype=np.uint8).reshape(-1, self.frontend.n_q)

    def decode(self, bits: np.ndarray) -> np.ndarray:
        """Minimum-Hamming-distance decoding of ``(N, n_q)`` bit rows, ties to the smallest message index."""
        patterns = self.pattern_matrix()
        if patterns.size == 0:
            raise InvalidCodeError("Cannot decode with an empty pattern map.")
        distances = np.count_nonzero(np.atleast_2d(bits)[:, None, :] != patterns[None, :, :], axis=2)
        return np.argmin(distances, axis=1)

    def scaled(self, factor: float) -> "RegionCode":
        """
        Scale the constellation by ``factor`` and the comparators covariantly.

        Homogeneous degree-``k`` functions keep their coefficients and get thresholds times ``factor**k``; other
        functions become ``y -> f(y / factor)``.
        """
        if factor <= 0:
            raise InvalidInputError("Scale factor must be positive.")
        functions, thresholds = [], []
        for p, t in zip(self.frontend.functions, self.frontend.thresholds):
            degrees = {term.degree for term in p.terms}
            if len(degrees) == 1 and 0 not in degrees:
                functions.append(p)
                thresholds.append(t * factor ** degrees.pop())
            else:
                functions.append(p.rescaled(1.0 / factor))
                thresholds.append(t)
        frontend = self.frontend.with_functions(functions).with_thresholds(thresholds)
        return RegionCode(
            constellation=tuple(tuple(v * factor for v in x) for x in self.constellation),
            frontend=frontend,
            pattern_map=dict(self.pattern_map),
        )

    def normalized(self) -> "RegionCode":
        """Rescale to unit per-dimension average power."""
        power = self.average_power
        if power <= 0:
            raise InvalidCodeError("Cannot normalize a code with zero average power.")
        return self.scaled(1.0 / math.sqrt(power))

    def precoded_for(self, channel: ChannelModel) -> np.ndarray:
        """
        Transmit points ``h^-1 x_m`` that make a square invertible channel look like the identity to the code.

        Raises:
            InvalidCodeError: if the channel is not square, does not match the code or is singular
        """
        if not channel.n_t == channel.n_r == self.frontend.dim:
            raise InvalidCodeError(f"Precoding needs a square {self.frontend.dim}x{self.frontend.dim} channel.")
        try:
            return np.linalg.solve(channel.matrix, self.points.T).T
        except np.linalg.LinAlgError as e:
            raise InvalidCodeError("Channel matrix is singular.") from e


def toy_code(kind: Literal["linear", "quadratic"]) -> RegionCode:
    """
    Two-comparator scalar codes.

    ``linear``: comparators ``y > 0`` and ``y > 1`` separate amplitudes (-0.5, 0.5, 1.5). ``quadratic``: comparators
    ``y > 0`` and ``y**2 > 1`` separate amplitudes (-1.5, -0.5, 0.5, 1.5).
    """
    y = MultivariatePolynomial.projection(1, 0)
    if kind == "linear":
        frontend = FrontendSpec(scenario=Scenario.LINEAR, n_q=2, functions=(y, y), thresholds=(0.0, 1.0))
        return RegionCode.from_constellation([[-0.5], [0.5], [1.5]], frontend)
    frontend = FrontendSpec.isotropic(linear=[[1.0], [0.0]], quadratic=[0.0, 1.0], thresholds=[0.0, 1.0])
    return RegionCode.from_constellation([[-1.5], [-0.5], [0.5], [1.5]], frontend)


def translate_into_bowl(arr: Arrangement, margin: float = 1.0) -> Arrangement:
    """
    Move a lifted arrangement up the last axis until its anchor points lie inside the paraboloid bowl.

    Anchors are the vertices, or the minimum-norm point of the common flat when there are fewer hyperplanes
    than dimensions; after the shift each anchor ``z`` satisfies ``z_last >= ||z_rest||^2 + margin``.
    """
    anchors = arr.vertices()
    if anchors.size == 0:
        anchors = np.linalg.lstsq(arr.normals, arr.offsets, rcond=None)[0][None, :]
    lift = float(np.max(np.sum(anchors[:, :-1] ** 2, axis=1) - anchors[:, -1])) + margin
    direction = np.zeros(arr.dim)
    direction[-1] = lift
    return arr.shifted(direction)


def _positive_root(a: float, b: float, c: float) -> float:
    """Positive root of ``a t^2 + b t + c`` for ``a >= 0`` and ``c < 0``; ``inf`` when there is none."""
    if a <= 0.0:
        return -c / b if b > 0.0 else math.inf
    root = math.sqrt(b * b - 4.0 * a * c)
    return -2.0 * c / (b + root) if b >= 0.0 else (root - b) / (2.0 * a)


def _bowl_gap(z: np.ndarray) -> float:
    """``||z_rest||^2 - z_last``: negative inside the paraboloid bowl and zero on the paraboloid."""
    return float(z[:-1] @ z[:-1] - z[-1])


def _anchor_cells(arr: Arrangement) -> dict[tuple[int, ...], tuple[np.ndarray, np.ndarray]]:
    """
    Anchor point and the hyperplanes through it for every cell of a lifted arrangement.

    Anchors are the vertices, or the lowest point of the common flat relative to the bowl when there are fewer
    hyperplanes than dimensions. Every choice of sides of the hyperplanes through an anchor is a cell.
    """
    normals, offsets = arr.normals, arr.offsets
    if arr.n < arr.dim:
        base = np.linalg.lstsq(normals, offsets, rcond=None)[0]
        basis = null_space(normals)
        lateral, vertical = basis[:-1], basis[-1]
        w = np.linalg.lstsq(2.0 * lateral.T @ lateral, vertical - 2.0 * lateral.T @ base[:-1], rcond=None)[0]
        anchors = [(base + basis @ w, np.arange(arr.n))]
    else:
        subsets = [np.array(s) for s in itertools.combinations(range(arr.n), arr.dim)]
        anchors = list(zip(arr.vertices(), subsets))
    cells: dict[tuple[int, ...], tuple[np.ndarray, np.ndarray]] = {}
    for point, through in anchors:
        signs = arr.sign_vectors(point)[0]
        for local in itertools.product((-1, 1), repeat=through.size):
            signs[through] = local
            cells.setdefault(tuple(int(s) for s in signs), (point, through))
    return cells


def _paraboloid_point(
    arr: Arrangement, signs: tuple[int, ...], anchor: np.ndarray, through: np.ndarray
) -> np.ndarray | None:
    """
    Input point whose lift lies in the cell ``signs``, or ``None`` when the cell has no recession direction.

    A short step from the anchor into the cell stays inside the bowl. A recession direction of the cell with a
    nonzero horizontal part then leaves the bowl, and the crossing keeps at least the margins of the step.
    """
    normals, offsets = arr.normals, arr.offsets
    s = np.asarray(signs, dtype=float)
    recession = cell_interior_point(normals, np.zeros(arr.n), signs)
    if recession is None or _bowl_gap(anchor) >= 0.0:
        return None
    horizontal = recession[:-1]
    tilt = np.zeros(arr.dim)
    norm = float(np.linalg.norm(horizontal))
    tilt[:-1] = horizontal / norm if norm > NORMAL_TOL else np.eye(arr.dim - 1)[0]
    # the recession point keeps unit distance to every hyperplane, so a half-unit tilt stays in the cone
    direction = recession + 0.5 * tilt

    step = np.linalg.lstsq(normals[through], s[through], rcond=None)[0]
    rest = np.setdiff1d(np.arange(arr.n), through)
    slack = s[rest] * (normals[rest] @ anchor - offsets[rest])
    rate = s[rest] * (normals[rest] @ step)
    leaving = rate < 0.0
    reach = float(np.min(slack[leaving] / -rate[leaving])) if np.any(leaving) else math.inf
    inside = _positive_root(
        float(step[:-1] @ step[:-1]), float(2.0 * anchor[:-1] @ step[:-1] - step[-1]), _bowl_gap(anchor)
    )
    start = anchor + ANCHOR_STEP * min(reach, inside, 1.0) * step

    t = _positive_root(
        float(direction[:-1] @ direction[:-1]),
        float(2.0 * start[:-1] @ direction[:-1] - direction[-1]),
        _bowl_gap(start),
    )
    return (start + t * direction)[:-1]


def _comparator_margin(arr: Arrangement, signs: np.ndarray, x: np.ndarray) -> float:
    """Smallest first-order distance from ``x`` to a comparator boundary, negative outside the cell ``signs``."""
    normals, offsets = arr.normals, arr.offsets
    linear, quadratic = normals[:, :-1], normals[:, -1]
    values = linear @ x + quadratic * (x @ x) - offsets
    gradients = np.linalg.norm(linear + 2.0 * quadratic[:, None] * x[None, :], axis=1)
    return float(np.min(signs * values / np.maximum(gradients, NORMAL_TOL)))


def _widen(arr: Arrangement, signs: tuple[int, ...], x: np.ndarray, reach: float) -> np.ndarray:
    """Move a representative away from its comparator boundaries without leaving the ball of radius ``reach``."""
    s = np.asarray(signs, dtype=float)

    def loss(v: np.ndarray) -> float:
        excess = float(np.linalg.norm(v)) - reach
        return 1.0 + excess if excess > 0.0 else -_comparator_margin(arr, s, v)

    result = minimize(loss, x, method="Nelder-Mead", options={"xatol": 1e-9, "fatol": 1e-12})
    better = _comparator_margin(arr, s, result.x) > _comparator_margin(arr, s, x)
    return result.x if better and np.linalg.norm(result.x) <= reach else x


def paraboloid_representatives(arr: Arrangement) -> dict[str, np.ndarray]:
    """
    One input point per cell of a bowl-translated arrangement that the paraboloid crosses, keyed by bit pattern.

    Bounded cells lie inside the bowl and are skipped. Each crossing point is then moved towards the largest
    distance from the comparator boundaries inside a ball ``REPRESENTATIVE_REACH`` times wider than all crossings.

    Raises:
        ConstructionFailureError: if a representative does not reproduce its cell's bit pattern
    """
    crossings = {}
    for signs, (anchor, through) in _anchor_cells(arr).items():
        point = _paraboloid_point(arr, signs, anchor, through)
        if point is not None:
            crossings[signs] = point
    if not crossings:
        return {}
    reach = REPRESENTATIVE_REACH * max(1.0, max(float(np.linalg.norm(x)) for x in crossings.values()))
    spec = arr.to_frontend()
    found = {}
    for signs, point in crossings.items():
        point = _widen(arr, signs, point, reach)
        key = bits_to_key(apply_frontend_batch(spec, point[None, :])[0])
        expected = "".join("1" if s > 0 else "0" for s in signs)
        if key != expected:
            raise ConstructionFailureError(f"Representative of cell {expected} reads pattern {key}.")
        found[key] = point
    return found


def build_paraboloid_code(rank: int, n_q: int, seed: int, canonical: bool = False) -> RegionCode:
    """
    Region code with ``alpha(rank, n_q)`` messages from Scenario-V comparators.

    A seeded generic arrangement in ``R^(rank+1)`` is translated so that every bounded cell lies strictly inside
    the paraboloid bowl; its hyperplanes become the comparators, and one input point per cell crossing the
    paraboloid becomes a codeword.

    Args:
        rank (int): input dimension (rank of the channel)
        n_q (int): number of comparators
        seed (int): root seed
        canonical (bool): for ``rank=1, n_q=2`` return the comparators ``y > 0``, ``y**2 > 1``

    Returns:
        RegionCode at unit average power

    Raises:
        ConstructionFailureError: if the paraboloid crosses other than ``alpha`` cells
    """
    if rank < 1 or n_q < 1 or n_q > MAX_ORACLE_HYPERPLANES:
        raise InvalidInputError(f"Need rank >= 1 and 1 <= n_q <= {MAX_ORACLE_HYPERPLANES}.")
    if canonical:
        if (rank, n_q) != (1, 2):
            raise InvalidInputError("The canonical instance exists for rank 1 and two comparators only.")
        return toy_code("quadratic").normalized()

    target = count_regions(rank, n_q).alpha
    lifted = translate_into_bowl(random_arrangement(rank + 1, n_q, seed))
    found = paraboloid_representatives(lifted)
    if len(found) != target:
        raise ConstructionFailureError(f"Found {len(found)} paraboloid patterns, expected {target}; re-seed.")
    logger.debug("Paraboloid code rank=%d n_q=%d: %d codewords", rank, n_q, target)

    keys = sorted(found, key=_decimal_key)
    code = RegionCode(
        constellation=tuple(tuple(float(v) for v in found[key]) for key in keys),
        frontend=lifted.to_frontend(),
        pattern_map={key: m for m, key in enumerate(keys)},
    )
    return code.normalized()


def count_shatter_formula(rank: int, d: int) -> int:
    """Size ``C(rank + d, d)`` of the point set shattered by degree-``d`` polynomials in ``rank`` variables."""
    if rank < 1 or d < 1:
        raise InvalidInputError("rank and d must be positive.")
    return math.comb(rank + d, d)


@dataclass(frozen=True)
class ShatterBound:
    """High-SNR rate from shattering: ``max(n_q, log2 l)`` as stated and ``min(n_q, log2 l)`` as constructed."""

    points: int
    stated_bits: float
    constructive_bits: float


def shatter_bound(rank: int, d: int, n_q: int) -> ShatterBound:
    """Both high-SNR shattering rates; logs a warning when they differ."""
    points = count_shatter_formula(rank, d)
    bits = math.log2(points)
    bound = ShatterBound(points=points, stated_bits=max(n_q, bits), constructive_bits=min(n_q, bits))
    if bound.stated_bits != bound.constructive_bits:
        logger.warning(
            "Shattering rate for rank=%d d=%d n_q=%d: stated %.4f, constructive %.4f",
            rank,
            d,
            n_q,
            bound.stated_bits,
            bound.constructive_bits,
        )
    return bound


def feature_matrix(points: np.ndarray, degree: int) -> np.ndarray:
    """Monomial features of degree at most ``degree`` for every row of ``points``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    exponents = np.array(monomial_exponents(points.shape[1], degree))
    return np.prod(points[:, None, :] ** exponents[None, :, :], axis=2)


def verify_shattering(points, degree: int) -> bool:
    """
    Whether polynomials of degree at most ``degree`` realize all ``2**l`` sign labelings of the points.

    Each labeling is checked for strict separability with a linear program; a labeling and its negation are
    equivalent, so half of them are tested.
    """
    features = feature_matrix(points, degree)
    count = features.shape[0]
    if count > MAX_SHATTER_POINTS:
        raise InvalidInputError(f"Shattering checks support at most {MAX_SHATTER_POINTS} points, got {count}.")
    for rest in itertools.product((-1.0, 1.0), repeat=count - 1):
        labels = np.array((1.0, *rest))
        result = linprog(
            np.zeros(features.shape[1]),
            A_ub=-labels[:, None] * features,
            b_ub=-np.ones(count),
            bounds=[(None, None)] * features.shape[1],
            method="highs",
        )
        if result.status != 0:
            logger.debug("Labeling %s is not realizable", labels)
            return False
    return True


def build_shattering_code(rank: int, d: int, n_q: int, seed: int, verify: bool = False) -> RegionCode:
    """
    Region code on ``C(rank + d, d)`` generic points indexed by degree-``d`` discriminants.

    Message ``t`` is indexed by the ``n_q``-bit binary form of ``t`` (ADC 1 most significant); ADC ``j`` uses the
    polynomial taking value ``+1`` at points whose bit is set and ``-1`` elsewhere, found by solving the square
    monomial feature system.

    Raises:
        InsufficientADCsError: if ``n_q < ceil(log2(C(rank + d, d)))``
        SingularFeatureMatrixError: if the sampled points give an ill-conditioned feature matrix
        ConstructionFailureError: if ``verify`` is set and the points are not fully shattered
    """
    count = count_shatter_formula(rank, d)
    if n_q < math.ceil(math.log2(count)):
        raise InsufficientADCsError(f"{count} messages need at least {math.ceil(math.log2(count))} ADCs, got {n_q}.")

    points = derive_rng(seed, rank, d).uniform(-1.0, 1.0, size=(count, rank))
    features = feature_matrix(points, d)
    if np.linalg.cond(features) > FEATURE_COND_LIMIT:
        raise SingularFeatureMatrixError(f"Feature matrix of the sampled points is singular for seed {seed}; re-seed.")

    exponents = monomial_exponents(rank, d)
    messages = np.arange(count)
    functions = []
    for j in range(n_q):
        targets = np.where(messages >> (n_q - 1 - j) & 1, 1.0, -1.0)
        coefficients = np.linalg.solve(features, targets)
        functions.append(MultivariatePolynomial.from_mapping(dict(zip(exponents, coefficients)), rank))
    frontend = FrontendSpec(
        scenario=Scenario.BOUNDED_DEGREE, n_q=n_q, functions=tuple(functions), thresholds=(0.0,) * n_q, degree_bound=d
    )
    if verify and not verify_shattering(points, d):
        raise ConstructionFailureError(f"Points for seed {seed} are not shattered by degree-{d} polynomials.")
    return RegionCode(
        constellation=tuple(tuple(float(v) for v in p) for p in points),
        frontend=frontend,
        pattern_map={format(t, f"0{n_q}b"): t for t in range(count)},
    )
