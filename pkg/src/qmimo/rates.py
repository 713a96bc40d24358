"""Induced channels, mutual information, Blahut-Arimoto input optimization and quantized-rate inner bounds."""

import functools
import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from scipy import special, stats
from scipy.optimize import root_scalar

from qmimo.channel import POWER_TOL, ChannelModel, apply_channel, svd_decompose
from qmimo.errors import (
    ConvergenceError,
    InfeasiblePowerError,
    InvalidInputError,
    ScenarioViolationError,
    UnsupportedDimensionError,
)
from qmimo.frontend import LabeledPartitionRd, Partition1D
from qmimo.seeding import derive_rng
from qmimo.settings import OptimizerSettings

logger = logging.getLogger(__name__)

PROB_TOL = 1e-12
ROW_TOL = 1e-9
MONOTONE_TOL = 1e-10
BOUNDARY_GAP = 1e-9
MAX_SUBCHANNELS = 4
WARM_START_MIX = 0.01


class InputDistribution(BaseModel):
    """
    Finitely supported channel-input distribution.

    Attributes:
        points (tuple): mass points, each a tuple of coordinates (scalars are accepted and wrapped)
        probs (tuple[float, ...]): non-negative masses summing to 1
    """

    model_config = ConfigDict(frozen=True)

    points: tuple[tuple[float, ...], ...]
    probs: tuple[float, ...]

    @field_validator("points", mode="before")
    @classmethod
    def _wrap_scalars(cls, points):
        return tuple(tuple(np.atleast_1d(np.asarray(p, dtype=float)).tolist()) for p in points)

    @model_validator(mode="after")
    def _check_probs(self) -> "InputDistribution":
        if len(self.points) != len(self.probs) or not self.points:
            raise ValueError("Need one probability per mass point and at least one point.")
        if min(self.probs) < 0 or abs(math.fsum(self.probs) - 1.0) > PROB_TOL:
            raise ValueError("Probabilities must be non-negative and sum to 1.")
        if len({len(p) for p in self.points}) != 1:
            raise ValueError("Mass points must share one dimension.")
        return self

    @classmethod
    def from_arrays(cls, points, probs) -> "InputDistribution":
        """Create a distribution from arrays, renormalizing the masses."""
        probs = np.clip(np.asarray(probs, dtype=float), 0.0, None)
        return cls(points=np.asarray(points, dtype=float).tolist(), probs=tuple((probs / probs.sum()).tolist()))

    @classmethod
    def antipodal(cls, power: float) -> "InputDistribution":
        """Equal masses on ``+-sqrt(power)``."""
        amplitude = math.sqrt(power)
        return cls(points=[-amplitude, amplitude], probs=(0.5, 0.5))

    @property
    def point_array(self) -> np.ndarray:
        """``(n, dim)`` array of mass points."""
        return np.asarray(self.points, dtype=float).reshape(len(self.points), -1)

    @property
    def prob_array(self) -> np.ndarray:
        """Masses as an array."""
        return np.asarray(self.probs, dtype=float)

    @property
    def power(self) -> float:
        """Per-dimension average power ``(1/dim) E||X||^2``."""
        points = self.point_array
        return float(self.prob_array @ np.sum(points**2, axis=1)) / points.shape[1]

    def pruned(self, threshold: float = 1e-6) -> "InputDistribution":
        """Drop masses below ``threshold`` and renormalize."""
        keep = self.prob_array >= threshold
        return InputDistribution.from_arrays(self.point_array[keep], self.prob_array[keep])


@dataclass(frozen=True)
class InducedDMC:
    """Discrete memoryless channel from input mass points to output symbols."""

    transition: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.transition, dtype=float)
        if t.ndim != 2 or np.any(t < 0.0) or np.any(t > 1.0 + ROW_TOL):
            raise InvalidInputError("Transition matrix entries must lie in [0, 1].")
        if np.any(np.abs(t.sum(axis=1) - 1.0) > ROW_TOL):
            raise InvalidInputError("Transition matrix rows must sum to 1.")
        object.__setattr__(self, "transition", t)

    @property
    def n_inputs(self) -> int:
        """Number of input points."""
        return self.transition.shape[0]

    @property
    def n_outputs(self) -> int:
        """Size of the output alphabet."""
        return self.transition.shape[1]


class AllocationPlan(BaseModel):
    """
    Split of the ADCs and of the total power across subchannels.

    Attributes:
        nq_split (tuple[int, ...]): ADCs per subchannel
        power_split (tuple[float, ...]): power per subchannel
    """

    model_config = ConfigDict(frozen=True)

    nq_split: tuple[int, ...]
    power_split: tuple[float, ...]

    @model_validator(mode="after")
    def _check_split(self) -> "AllocationPlan":
        if len(self.nq_split) != len(self.power_split):
            raise ValueError("ADC and power splits must have one entry per subchannel.")
        if any(n < 0 for n in self.nq_split) or any(p < 0 for p in self.power_split):
            raise ValueError("Splits must be non-negative.")
        return self


class RateFamily(StrEnum):
    """Comparator families for scalar subchannels."""

    PROJECTION = "I"
    LINEAR = "linear"
    QUADRATIC = "quadratic-V"


def _interval_transition(
    sigma: float, xs: np.ndarray, edges: np.ndarray, labels: Sequence[int], noise_std: float = 1.0
) -> np.ndarray:
    """Label probabilities for every input and every edge vector; ``edges`` has shape ``(..., m + 1)``."""
    means = sigma * np.asarray(xs, dtype=float)
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[..., None, :-1], edges[..., None, 1:]
    mu = means[:, None]
    if noise_std == 0.0:
        probs = ((lo < mu) & (mu <= hi)).astype(float)
    else:
        z_lo, z_hi = (lo - mu) / noise_std, (hi - mu) / noise_std
        probs = np.where(
            z_lo > 0.0, stats.norm.sf(z_lo) - stats.norm.sf(z_hi), stats.norm.cdf(z_hi) - stats.norm.cdf(z_lo)
        )
    onehot = np.eye(max(labels) + 1)[list(labels)]
    return np.clip(probs, 0.0, 1.0) @ onehot


def dmc_from_partition(sigma: float, points: Sequence[float], part: Partition1D, noise_std: float = 1.0) -> InducedDMC:
    """
    Induced DMC of the scalar channel ``Y = sigma x + N`` read through a labeled interval partition.

    Entry ``(j, l)`` is the Gaussian measure of the intervals labeled ``l`` around ``sigma * points[j]``; upper tails
    use the survival function.
    """
    xs = np.asarray(points, dtype=float).ravel()
    if not np.all(np.isfinite(xs)):
        raise InvalidInputError("Input points must be finite.")
    return InducedDMC(_interval_transition(sigma, xs, part.edges, part.labels, noise_std))


def dmc_from_labeled_partition(
    channel: ChannelModel, points, part: LabeledPartitionRd, samples: int = 100_000, seed: int = 0
) -> InducedDMC:
    """
    Monte-Carlo induced DMC of a MIMO channel read through a multi-dimensional labeled partition.

    Columns follow the cell order of ``part``; the last column collects outputs lying in no cell.
    """
    xs = np.asarray(points, dtype=float).reshape(-1, channel.n_t)
    if part.dim != channel.n_r:
        raise InvalidInputError(f"Partition of R^{part.dim} cannot read {channel.n_r} antenna outputs.")
    rows = []
    for j, x in enumerate(xs):
        y = apply_channel(channel, np.broadcast_to(x, (samples, channel.n_t)), derive_rng(seed, j))
        margins = part.margins(y)
        column = np.where(margins.max(axis=1) > 0.0, margins.argmax(axis=1), len(part.cells))
        rows.append(np.bincount(column, minlength=len(part.cells) + 1) / samples)
    return InducedDMC(np.array(rows))


def _mi_bits(p: np.ndarray, transition: np.ndarray) -> np.ndarray:
    """Mutual information for one distribution and one or many stacked transition matrices."""
    support = p > 0.0
    p, transition = p[support], transition[..., support, :]
    q = np.einsum("j,...jv->...v", p, transition)
    return np.einsum("j,...jv->...", p, special.rel_entr(transition, q[..., None, :])) / math.log(2.0)


def mutual_information(dmc: InducedDMC, dist: InputDistribution) -> float:
    """Mutual information in bits between the inputs of ``dist`` and the DMC outputs."""
    if dmc.n_inputs != len(dist.probs):
        raise InvalidInputError(f"DMC has {dmc.n_inputs} inputs, distribution has {len(dist.probs)} points.")
    p = dist.prob_array
    support = p > 0.0
    return float(max(_mi_bits(p[support], dmc.transition[support]), 0.0))


@dataclass(frozen=True)
class BlahutArimotoResult:
    """Optimized input distribution with its capacity estimate and per-iteration history (bits)."""

    distribution: InputDistribution
    capacity_bits: float
    iterations: int
    history: tuple[float, ...] = field(repr=False)
    multiplier: float


def _power_slack(power: float) -> float:
    """Feasibility slack on the mean power, relative to the limit once it exceeds one."""
    return POWER_TOL * max(1.0, power)


def _tilt(log_w: np.ndarray, cost: np.ndarray, power: float, guess: float) -> tuple[np.ndarray, float]:
    """Exponentially tilt ``exp(log_w)`` so the mean cost meets ``power``; returns the distribution and multiplier."""
    p = special.softmax(log_w)
    if p @ cost <= power:
        return p, 0.0
    # the root is solved on costs in units of the limit so its accuracy does not degrade at high power
    scale = max(power, POWER_TOL)
    scaled = cost / scale
    target = power / scale

    def excess(mu: float) -> float:
        return float(special.softmax(log_w - mu * scaled) @ scaled) - target

    def slope(mu: float) -> float:
        w = special.softmax(log_w - mu * scaled)
        return -float(w @ scaled**2 - (w @ scaled) ** 2)

    guess *= scale
    if guess > 0.0 and slope(guess) < 0.0:
        try:
            newton = root_scalar(excess, x0=guess, fprime=slope, method="newton", xtol=1e-14, maxiter=20)
        except (RuntimeError, ZeroDivisionError):
            newton = None
        if newton is not None and newton.converged and newton.root > 0.0 and abs(excess(newton.root)) <= POWER_TOL:
            return special.softmax(log_w - newton.root * scaled), newton.root / scale
    hi = max(2.0 * guess, 1.0)
    while excess(hi) > 0.0:
        if hi > 1e300:
            return special.softmax(log_w - hi * scaled), hi / scale
        hi *= 2.0
    mu = root_scalar(excess, bracket=(0.0, hi), method="brentq", xtol=1e-14).root
    return special.softmax(log_w - mu * scaled), mu / scale


def _project(p: np.ndarray, cost: np.ndarray, power: float) -> np.ndarray:
    """Tilt a distribution that exceeds the power limit back onto it; feasible ones are returned unchanged."""
    if p @ cost <= power:
        return p
    with np.errstate(divide="ignore"):
        return _tilt(np.log(p), cost, power, 0.0)[0]


def blahut_arimoto(
    dmc: InducedDMC,
    candidate_points,
    power_limit: float,
    tol: float = 1e-9,
    max_iter: int = 5000,
    initial: np.ndarray | None = None,
) -> BlahutArimotoResult:
    """
    Capacity of a DMC under an average power constraint by alternating maximization.

    Each iteration applies the multiplicative update ``p_j <- p_j exp(D(T_j || q))`` followed by an exponential tilt
    ``exp(-lambda x_j^2)`` whose multiplier is re-solved so the mean power meets the limit whenever the update would
    exceed it. The starting point is the tilted uniform distribution unless ``initial`` is given.

    Args:
        dmc (InducedDMC): channel with one row per candidate point
        candidate_points: scalar or vector candidate inputs
        power_limit (float): average power budget
        tol (float): stop once the per-iteration gain in bits drops below this
        max_iter (int): iteration cap
        initial (np.ndarray | None): starting distribution over the candidates, tilted onto the limit when it
            exceeds it by no more than the relative power slack

    Raises:
        InfeasiblePowerError: if no candidate meets the power limit
        ConvergenceError: if the mutual information decreases between iterations
    """
    points = np.asarray(candidate_points, dtype=float).reshape(dmc.n_inputs, -1)
    cost = np.sum(points**2, axis=1) / points.shape[1]
    slack = _power_slack(power_limit)
    if not np.any(cost <= power_limit + slack):
        raise InfeasiblePowerError(f"No candidate point meets the power limit {power_limit}.")

    if initial is None:
        p, lam = _tilt(np.zeros(dmc.n_inputs), cost, power_limit, 0.0)
    else:
        p, lam = np.asarray(initial, dtype=float), 0.0
        if p @ cost > power_limit + slack:
            raise InvalidInputError("Initial distribution violates the power limit.")
        p = _project(p, cost, power_limit)

    transition = dmc.transition
    mi = float(_mi_bits(p, transition))
    history = [mi]
    iterations = 0
    for iterations in range(1, max_iter + 1):
        q = p @ transition
        with np.errstate(divide="ignore", invalid="ignore"):
            divergence = special.rel_entr(transition, q[None, :]).sum(axis=1)
            log_w = np.where(p > 0.0, np.log(p) + divergence, -np.inf)
        p, lam = _tilt(log_w, cost, power_limit, lam)
        updated = float(_mi_bits(p, transition))
        if updated < mi - MONOTONE_TOL:
            raise ConvergenceError(f"Mutual information decreased from {mi} to {updated} at iteration {iterations}.")
        history.append(updated)
        gain, mi = updated - mi, updated
        if gain < tol:
            break

    logger.debug("Blahut-Arimoto: %d iterations, %.9f bits, multiplier %.4g", iterations, mi, lam)
    return BlahutArimotoResult(
        distribution=InputDistribution.from_arrays(points, p),
        capacity_bits=mi,
        iterations=iterations,
        history=tuple(history),
        multiplier=lam,
    )


@dataclass(frozen=True)
class SubchannelRate:
    """Optimized partition of one scalar subchannel with its rate and input distribution."""

    partition: Partition1D
    rate_bits: float
    distribution: InputDistribution
    iterations: int


def _layout(family: RateFamily, n_qi: int, settings: OptimizerSettings) -> tuple[int, tuple[int, ...]]:
    match family:
        case RateFamily.PROJECTION:
            if n_qi != 1:
                raise ScenarioViolationError(f"Scenario I uses exactly one ADC per subchannel, got {n_qi}.")
            return 1, (0, 1)
        case RateFamily.LINEAR:
            return n_qi, tuple(range(n_qi + 1))
        case RateFamily.QUADRATIC if settings.quadratic_layout == "mixed":
            return 2 * n_qi - 1, tuple(range(2 * n_qi))
        case RateFamily.QUADRATIC:
            return 2 * n_qi, (*range(2 * n_qi), 0)


def candidate_grid(power: float, settings: OptimizerSettings) -> np.ndarray:
    """Equispaced candidates in ``[-c sqrt(P), c sqrt(P)]`` plus ``-sqrt(P)``, ``0`` and ``sqrt(P)``."""
    amplitude = math.sqrt(power)
    reach = settings.candidate_span * amplitude
    grid = np.linspace(-reach, reach, settings.candidate_points)
    return np.unique(np.concatenate([grid, [-amplitude, 0.0, amplitude]]))


@dataclass
class _SearchState:
    boundaries: np.ndarray
    p: np.ndarray
    mi: float
    iterations: int = 0


class _ThresholdSearch:
    """Alternating boundary coordinate descent and Blahut-Arimoto for one subchannel and one start."""

    def __init__(self, sigma: float, power: float, labels: tuple[int, ...], settings: OptimizerSettings) -> None:
        self.sigma = sigma
        self.power = power
        self.labels = labels
        self.settings = settings
        self.xs = candidate_grid(power, settings)
        self.cost = self.xs**2
        self.span = settings.candidate_span * sigma * math.sqrt(power) + 4.0

    def transition(self, boundaries: np.ndarray) -> np.ndarray:
        """Transition matrix of all candidates for the given boundaries."""
        edges = np.concatenate(([-np.inf], boundaries, [np.inf]))
        return _interval_transition(self.sigma, self.xs, edges, self.labels)

    def refine(self, state: _SearchState) -> _SearchState:
        """Blahut-Arimoto on the current partition, warm-started from a mixture with the tilted uniform."""
        dmc = InducedDMC(self.transition(state.boundaries))
        start = None
        if state.p is not None:
            uniform, _ = _tilt(np.zeros(self.xs.size), self.cost, self.power, 0.0)
            start = _project((1.0 - WARM_START_MIX) * state.p + WARM_START_MIX * uniform, self.cost, self.power)
        result = blahut_arimoto(
            dmc, self.xs, self.power, self.settings.ba_tol, self.settings.ba_max_iter, initial=start
        )
        iterations = state.iterations + result.iterations
        if state.p is not None and result.capacity_bits <= state.mi:
            return _SearchState(state.boundaries, state.p, state.mi, iterations)
        return _SearchState(state.boundaries, result.distribution.prob_array, result.capacity_bits, iterations)

    def sweep(self, state: _SearchState, half_width: float | None) -> tuple[_SearchState, bool]:
        """One coordinate-descent pass over the boundaries at fixed distribution; only improvements are kept."""
        boundaries, mi, moved = state.boundaries.copy(), state.mi, False
        support = state.p > 0.0
        p, xs = state.p[support], self.xs[support]
        for i in range(boundaries.size):
            centre = 0.0 if half_width is None else boundaries[i]
            width = self.span if half_width is None else half_width
            grid = np.linspace(centre - width, centre + width, self.settings.grid_points)
            lower = boundaries[i - 1] if i > 0 else -np.inf
            upper = boundaries[i + 1] if i + 1 < boundaries.size else np.inf
            grid = grid[(grid > lower + BOUNDARY_GAP) & (grid < upper - BOUNDARY_GAP)]
            if grid.size == 0:
                continue
            edges = np.tile(np.concatenate(([-np.inf], boundaries, [np.inf])), (grid.size, 1))
            edges[:, i + 1] = grid
            values = _mi_bits(p, _interval_transition(self.sigma, xs, edges, self.labels))
            best = int(np.argmax(values))
            if values[best] > mi:
                boundaries[i], mi, moved = grid[best], float(values[best]), True
        return _SearchState(boundaries, state.p, mi, state.iterations), moved

    def run(self, boundaries: np.ndarray, p: np.ndarray | None) -> _SearchState:
        """Search from the given start and return the best state found."""
        state = _SearchState(np.asarray(boundaries, dtype=float), p, -np.inf)
        if p is not None:
            state.mi = float(_mi_bits(p[p > 0.0], self.transition(state.boundaries)[p > 0.0]))
        state = self.refine(state)
        half_width = None
        for level in range(self.settings.refinements + 1):
            if level:
                half_width = (self.span if half_width is None else half_width) * self.settings.shrink
            for _ in range(self.settings.rounds):
                state, moved = self.sweep(state, half_width)
                before = state.mi
                state = self.refine(state)
                if not moved and state.mi - before < self.settings.ba_tol:
                    break
        return state


def _extend(boundaries: np.ndarray, count: int, span: float) -> np.ndarray:
    """Append boundaries to the right of the existing ones, refining the partition."""
    extra = count - boundaries.size
    if extra <= 0:
        return boundaries
    top = max(span, boundaries[-1] + 1.0)
    return np.concatenate([boundaries, np.linspace(boundaries[-1], top, extra + 2)[1:-1]])


def _family_index(family: RateFamily) -> int:
    return list(RateFamily).index(family)


@functools.lru_cache(maxsize=4096)
def _optimize_cached(
    sigma: float, power: float, n_qi: int, family: RateFamily, settings: OptimizerSettings
) -> SubchannelRate:
    count, labels = _layout(family, n_qi, settings)
    search = _ThresholdSearch(sigma, power, labels, settings)

    if family is RateFamily.PROJECTION:
        # antipodal signalling is optimal for a single sign quantizer
        p = np.where(np.isin(search.xs, [-math.sqrt(power), math.sqrt(power)]), 0.5, 0.0)
        dmc = InducedDMC(search.transition(np.zeros(1)))
        result = blahut_arimoto(dmc, search.xs, power, settings.ba_tol, settings.ba_max_iter, initial=p)
        partition = Partition1D(boundaries=(0.0,), labels=labels)
        return SubchannelRate(partition, result.capacity_bits, result.distribution, result.iterations)

    starts: list[tuple[np.ndarray, np.ndarray | None]] = []
    spread = math.sqrt(sigma**2 * power + 1.0)
    quantiles = stats.norm.ppf(np.arange(1, count + 1) / (count + 1))
    starts.append((spread * quantiles, None))

    smaller = RateFamily.PROJECTION if family is RateFamily.LINEAR else RateFamily.LINEAR
    smaller_n = 1 if smaller is RateFamily.PROJECTION else n_qi
    base = _optimize_cached(sigma, power, smaller_n, smaller, settings)
    starts.append((_extend(np.asarray(base.partition.boundaries), count, search.span), base.distribution.prob_array))

    for k in range(max(settings.starts - len(starts), 0)):
        rng = derive_rng(settings.seed, n_qi, _family_index(family), k)
        starts.append((np.sort(rng.uniform(-search.span, search.span, size=count)), None))

    results = [search.run(boundaries, p) for boundaries, p in starts]
    best = min(results, key=lambda s: (-round(s.mi, 12), tuple(s.boundaries)))
    logger.debug(
        "Thresholds family=%s n_qi=%d snr=%.4g: %.6f bits at %s",
        family,
        n_qi,
        sigma**2 * power,
        best.mi,
        best.boundaries,
    )
    partition = Partition1D(boundaries=tuple(float(b) for b in best.boundaries), labels=labels)
    distribution = InputDistribution.from_arrays(search.xs, best.p)
    return SubchannelRate(partition, best.mi, distribution, best.iterations)


def optimize_thresholds(
    sigma: float, power: float, n_qi: int, family: RateFamily | str, settings: OptimizerSettings | None = None
) -> SubchannelRate:
    """
    Best interval partition and input distribution for one scalar subchannel ``Y = sigma X + N``.

    Linear comparators give ``n_qi + 1`` intervals; quadratic Scenario-V comparators give ``2 n_qi`` (mixed layout)
    or ``2 n_qi + 1`` intervals with the outermost pair sharing a label (all-quadratic layout). Boundaries are found by
    multi-start coordinate descent on shrinking grids, alternating with Blahut-Arimoto. The starts include the
    Gaussian-quantile partition and a refinement of the smaller family's optimum, so the linear rate is never below
    the Scenario-I rate and the quadratic rate never below the linear rate.

    Args:
        sigma (float): subchannel gain
        power (float): power budget of the subchannel
        n_qi (int): ADCs assigned to the subchannel
        family (RateFamily | str): ``I``, ``linear`` or ``quadratic-V``
        settings (OptimizerSettings | None): optimizer settings, defaults when omitted

    Returns:
        SubchannelRate; zero power, gain or ADC count gives rate 0
    """
    settings = settings or OptimizerSettings()
    family = RateFamily(family)
    if n_qi < 0 or power < 0:
        raise InvalidInputError("ADC count and power must be non-negative.")
    if n_qi == 0 or power == 0.0 or sigma == 0.0:
        silent = InputDistribution(points=[0.0], probs=(1.0,))
        return SubchannelRate(Partition1D(boundaries=(), labels=(0,)), 0.0, silent, 0)
    return _optimize_cached(float(sigma), float(power), int(n_qi), family, settings)


@dataclass(frozen=True)
class SubchannelReport:
    """Allocation outcome of one subchannel."""

    index: int
    sigma: float
    n_q: int
    power: float
    snr: float
    rate_bits: float
    boundaries: tuple[float, ...]
    iterations: int


@dataclass(frozen=True)
class AllocationResult:
    """Best allocation plan with its rate and per-subchannel breakdown."""

    plan: AllocationPlan
    rate_bits: float
    subchannels: tuple[SubchannelReport, ...]


def compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    """All weak compositions of ``total`` into ``parts`` non-negative integers, lexicographically ordered."""
    result = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        edges = (-1, *bars, total + parts - 1)
        result.append(tuple(b - a - 1 for a, b in itertools.pairwise(edges)))
    return sorted(result)


def power_resolution(s: int, settings: OptimizerSettings) -> int:
    """Simplex grid points per dimension: the configured value, else 21 up to three subchannels and 11 for four."""
    if settings.power_resolution is not None:
        return settings.power_resolution
    return 21 if s <= 3 else 11


def allocate_and_bound(
    channel: ChannelModel, n_q: int, family: RateFamily | str, settings: OptimizerSettings | None = None
) -> AllocationResult:
    """
    Quantized-rate inner bound of a MIMO channel through its SVD subchannels.

    Every composition of the ADCs over the subchannels is combined with every point of a simplex grid over the total
    power ``n_t P``; subchannels without ADCs get no power. Each distinct ``(snr, n_qi)`` pair is optimized once, in
    parallel, and the best plan wins with ties broken lexicographically.

    Raises:
        UnsupportedDimensionError: for more than four subchannels
        ScenarioViolationError: for Scenario I unless every subchannel gets exactly one ADC
        InvalidInputError: for a noiseless channel
    """
    settings = settings or OptimizerSettings()
    family = RateFamily(family)
    if n_q < 1:
        raise InvalidInputError("n_q must be positive.")
    if channel.noise_var <= 0:
        raise InvalidInputError("Rate bounds need a positive noise variance.")

    sub = svd_decompose(channel)
    s = sub.s
    if s > MAX_SUBCHANNELS:
        raise UnsupportedDimensionError(f"Allocation supports at most {MAX_SUBCHANNELS} subchannels, got {s}.")
    if s == 0:
        return AllocationResult(AllocationPlan(nq_split=(), power_split=()), 0.0, ())
    gains = sub.sigmas / math.sqrt(channel.noise_var)
    total = channel.total_power

    splits = compositions(n_q, s)
    if family is RateFamily.PROJECTION:
        splits = [split for split in splits if all(n == 1 for n in split)]
        if not splits:
            raise ScenarioViolationError(f"Scenario I needs one ADC per subchannel: n_q={n_q}, s={s}.")
    steps = power_resolution(s, settings) - 1
    power_grid = [tuple(k * total / steps for k in point) for point in compositions(steps, s)]

    plans = [
        (split, powers)
        for split in splits
        for powers in power_grid
        if all(n > 0 or p == 0.0 for n, p in zip(split, powers))
    ]
    keys = sorted({(float(g * g * p), n) for split, powers in plans for g, n, p in zip(gains, split, powers)})
    logger.info("Allocating %d ADCs over %d subchannels: %d plans, %d subproblems", n_q, s, len(plans), len(keys))
    rates = Parallel(n_jobs=settings.jobs)(
        delayed(optimize_thresholds)(1.0, snr, n, family, settings) for snr, n in keys
    )
    table = dict(zip(keys, rates))

    def value(plan: tuple[tuple[int, ...], tuple[float, ...]]) -> float:
        split, powers = plan
        return math.fsum(table[(float(g * g * p), n)].rate_bits for g, n, p in zip(gains, split, powers))

    best = max(plans, key=lambda plan: (value(plan), tuple(-n for n in plan[0]), tuple(-p for p in plan[1])))
    split, powers = best
    reports = tuple(
        SubchannelReport(
            index=k,
            sigma=float(sub.sigmas[k]),
            n_q=n,
            power=p,
            snr=float(g * g * p),
            rate_bits=table[(float(g * g * p), n)].rate_bits,
            boundaries=table[(float(g * g * p), n)].partition.boundaries,
            iterations=table[(float(g * g * p), n)].iterations,
        )
        for k, (g, n, p) in enumerate(zip(gains, split, powers))
    )
    return AllocationResult(AllocationPlan(nq_split=split, power_split=powers), value(best), reports)


def scenario1_baseline(channel: ChannelModel, n_q: int | None = None) -> float:
    """
    Rate of sign quantizers on the raw antenna outputs with uniform antipodal inputs ``{+-sqrt(P)}^n_t``.

    The joint transition to all ``2**n_r`` sign patterns is exact, so coupled antennas are handled too.

    Raises:
        ScenarioViolationError: if ``n_q`` differs from ``n_r``
    """
    n_q = channel.n_r if n_q is None else n_q
    if n_q != channel.n_r:
        raise ScenarioViolationError(f"Scenario I needs n_q = n_r, got n_q={n_q}, n_r={channel.n_r}.")
    inputs = math.sqrt(channel.power) * np.array(list(itertools.product((-1.0, 1.0), repeat=channel.n_t)))
    means = inputs @ channel.matrix.T
    if channel.noise_var > 0:
        p_one = stats.norm.sf(-means / math.sqrt(channel.noise_var))
    else:
        p_one = (means > 0.0).astype(float)
    patterns = np.array(list(itertools.product((0, 1), repeat=channel.n_r)), dtype=bool)
    transition = np.prod(np.where(patterns[None, :, :], p_one[:, None, :], 1.0 - p_one[:, None, :]), axis=2)
    uniform = InputDistribution.from_arrays(inputs, np.ones(len(inputs)))
    return mutual_information(InducedDMC(transition), uniform)


def gaussian_capacity(snr: float) -> float:
    """Unquantized scalar Gaussian capacity ``(1/2) log2(1 + snr)``."""
    return 0.5 * math.log2(1.0 + snr)


def unquantized_bound(channel: ChannelModel, power_split: Sequence[float] | None = None) -> float:
    """
    Sum of unquantized subchannel capacities, the ceiling of every quantized rate for the same power split.

    Without a split the total power ``n_t P`` is shared equally.
    """
    sub = svd_decompose(channel)
    if sub.s == 0:
        return 0.0
    if power_split is None:
        powers = np.full(sub.s, channel.total_power / sub.s)
    else:
        powers = np.asarray(power_split, dtype=float)
    if channel.noise_var == 0:
        return math.inf
    return math.fsum(gaussian_capacity(s * s * p / channel.noise_var) for s, p in zip(sub.sigmas, powers))
