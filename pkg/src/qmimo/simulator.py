"""Seeded Monte-Carlo link simulation of region codes and optimized partitions."""

import logging
import math
import time
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt, model_validator
from scipy import stats

from qmimo.channel import ChannelModel, apply_channel
from qmimo.errors import InvalidCodeError, InvalidInputError
from qmimo.frontend import Partition1D, apply_frontend_batch, induced_partition_1d
from qmimo.geometry import RegionCode
from qmimo.rates import InputDistribution, dmc_from_partition, mutual_information
from qmimo.seeding import derive_rng
from qmimo.settings import SimulationSettings

logger = logging.getLogger(__name__)

Z95 = 1.96
MI_SLACK = 0.005


class TrialReport(BaseModel):
    """
    Outcome of one Monte-Carlo run.

    Attributes:
        label (str): scheme name
        power (float): power budget P the scheme was simulated at
        trials (int): channel uses simulated
        ser (float): symbol error rate
        ci95_ser (float): normal-approximation 95% half-width of the SER
        empirical_mi_bits (float): Miller-Madow corrected message/pattern mutual information
        seed (int): root seed of the run
        n_q (int | None): comparators of the simulated front-end, which bound the mutual information
        wall_ms (int): elapsed wall-clock time, excluded from equality
    """

    model_config = ConfigDict(frozen=True)

    label: str
    power: float
    trials: PositiveInt
    ser: float = Field(ge=0.0, le=1.0)
    ci95_ser: float = Field(ge=0.0)
    empirical_mi_bits: float = Field(ge=0.0)
    seed: int
    n_q: PositiveInt | None = None
    wall_ms: NonNegativeInt = 0

    @model_validator(mode="after")
    def _mi_within_adc_bits(self) -> "TrialReport":
        if self.n_q is not None and self.empirical_mi_bits > self.n_q + MI_SLACK:
            raise ValueError(f"{self.empirical_mi_bits} bits exceed what {self.n_q} one-bit ADCs can carry.")
        return self

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrialReport):
            return NotImplemented
        return self.model_dump(exclude={"wall_ms"}) == other.model_dump(exclude={"wall_ms"})

    def __hash__(self) -> int:
        return hash(tuple(self.model_dump(exclude={"wall_ms"}).values()))


def ci95(ser: float, trials: int) -> float:
    """Half-width ``1.96 sqrt(ser (1 - ser) / trials)``."""
    return Z95 * math.sqrt(ser * (1.0 - ser) / trials)


def empirical_mi(joint_counts) -> float:
    """
    Mutual information in bits of an empirical joint histogram with Miller-Madow bias correction.

    The plug-in estimate overstates the information by about ``(K - 1)(L - 1) / (2 N ln 2)`` for ``K`` non-empty
    rows, ``L`` non-empty columns and ``N`` samples; that term is subtracted. The result is clamped to
    ``[0, log2 min(K, L)]``.
    """
    counts = np.asarray(joint_counts, dtype=float)
    if counts.ndim != 2 or np.any(counts < 0):
        raise InvalidInputError("Joint counts must be a non-negative matrix.")
    total = counts.sum()
    if total <= 0:
        raise InvalidInputError("Joint counts must have a positive total.")

    rows, cols, cells = counts.sum(axis=1), counts.sum(axis=0), counts.ravel()
    plug_in = (
        stats.entropy(rows[rows > 0], base=2)
        + stats.entropy(cols[cols > 0], base=2)
        - stats.entropy(cells[cells > 0], base=2)
    )
    n_rows, n_cols = np.count_nonzero(rows), np.count_nonzero(cols)
    bias = (n_rows - 1) * (n_cols - 1) / (2.0 * total * math.log(2.0))
    return float(np.clip(plug_in - bias, 0.0, math.log2(min(n_rows, n_cols))))


def _joint_matrix(counter: Counter, n_messages: int) -> np.ndarray:
    """Dense ``(messages, observed symbols)`` matrix from ``(message, symbol)`` counts."""
    symbols = sorted({symbol for _, symbol in counter})
    column = {symbol: c for c, symbol in enumerate(symbols)}
    joint = np.zeros((n_messages, max(len(symbols), 1)), dtype=np.int64)
    for (message, symbol), count in counter.items():
        joint[message, column[symbol]] += count
    return joint


def _batches(trials: int, batch_size: int) -> list[tuple[int, int]]:
    return [(b, min(batch_size, trials - start)) for b, start in enumerate(range(0, trials, batch_size))]


def _code_batch(
    code: RegionCode, transmit: np.ndarray, channel: ChannelModel, seed: int, batch: int, size: int
) -> tuple[int, Counter]:
    rng = derive_rng(seed, batch)
    messages = rng.integers(0, code.size, size=size)
    bits = apply_frontend_batch(code.frontend, apply_channel(channel, transmit[messages], rng))
    weights = 1 << np.arange(code.frontend.n_q - 1, -1, -1, dtype=np.int64)
    symbols = bits.astype(np.int64) @ weights
    errors = int(np.count_nonzero(code.decode(bits) != messages))
    return errors, Counter(zip(messages.tolist(), symbols.tolist()))


def _summarize(
    label: str, power: float, trials: int, seed: int, results, n_messages: int, n_q: int, started: float
) -> TrialReport:
    errors = sum(e for e, _ in results)
    counter: Counter = Counter()
    for _, batch_counts in results:
        counter.update(batch_counts)
    ser = errors / trials
    return TrialReport(
        label=label,
        power=power,
        trials=trials,
        ser=ser,
        ci95_ser=ci95(ser, trials),
        empirical_mi_bits=empirical_mi(_joint_matrix(counter, n_messages)),
        seed=seed,
        n_q=n_q,
        wall_ms=int(round((time.perf_counter() - started) * 1000.0)),
    )


def simulate_code(
    code: RegionCode,
    channel: ChannelModel,
    trials: int,
    seed: int,
    settings: SimulationSettings | None = None,
    precode: bool = False,
    label: str = "code",
) -> TrialReport:
    """
    Simulate uniform messages through encoder, channel, front-end, ADCs and minimum-Hamming decoder.

    Trials are split into fixed-size batches, each drawing from its own generator derived from ``seed`` and the batch
    index, so the report does not depend on the worker count. With ``precode`` the constellation is sent as
    ``h^-1 x_m`` through a square channel.

    Args:
        code (RegionCode): code to simulate
        channel (ChannelModel): channel; without precoding ``n_t`` and ``n_r`` must equal the code dimension
        trials (int): number of channel uses
        seed (int): root seed
        settings (SimulationSettings | None): batch size and worker cap
        precode (bool): invert the channel at the transmitter
        label (str): name carried into the report

    Raises:
        InvalidCodeError: for an empty code or a channel that does not match it
    """
    settings = settings or SimulationSettings()
    if code.size == 0 or not code.pattern_map:
        raise InvalidCodeError("Cannot simulate a code with an empty pattern map.")
    if trials < 1:
        raise InvalidInputError("trials must be positive.")
    if precode:
        transmit = code.precoded_for(channel)
    elif channel.n_t == channel.n_r == code.frontend.dim:
        transmit = code.points
    else:
        shape = f"{channel.n_r}x{channel.n_t}"
        raise InvalidCodeError(f"Code of dimension {code.frontend.dim} does not fit a {shape} channel.")

    started = time.perf_counter()
    results = Parallel(n_jobs=settings.jobs)(
        delayed(_code_batch)(code, transmit, channel, seed, b, size)
        for b, size in _batches(trials, settings.batch_size)
    )
    report = _summarize(label, channel.power, trials, seed, results, code.size, code.frontend.n_q, started)
    logger.info("Simulated %s at P=%g: ser=%.3g, mi=%.4f", label, channel.power, report.ser, report.empirical_mi_bits)
    return report


@dataclass(frozen=True)
class PartitionScheme:
    """
    Scalar scheme made of an interval partition and an input distribution, decoded by MAP on the induced DMC.

    Attributes:
        partition (Partition1D): receiver partition of the channel output
        distribution (InputDistribution): transmit mass points and probabilities
        label (str): scheme name
    """

    partition: Partition1D
    distribution: InputDistribution
    label: str = "partition"

    @property
    def power(self) -> float:
        """Average power of the input distribution."""
        return self.distribution.power

    def scaled(self, factor: float) -> "PartitionScheme":
        """Scale mass points and boundaries together."""
        if factor <= 0:
            raise InvalidInputError("Scale factor must be positive.")
        dist = InputDistribution.from_arrays(self.distribution.point_array * factor, self.distribution.prob_array)
        partition = Partition1D(
            boundaries=tuple(b * factor for b in self.partition.boundaries),
            labels=self.partition.labels,
            patterns=self.partition.patterns,
        )
        return PartitionScheme(partition, dist, self.label)

    def normalized(self) -> "PartitionScheme":
        """Rescale to unit average power."""
        if self.power <= 0:
            raise InvalidCodeError("Cannot normalize a scheme with zero average power.")
        return self.scaled(1.0 / math.sqrt(self.power))


def _check_scalar(channel: ChannelModel) -> float:
    if channel.n_t != 1 or channel.n_r != 1:
        raise InvalidInputError(f"Partition schemes need a scalar channel, got {channel.n_r}x{channel.n_t}.")
    return float(channel.matrix[0, 0])


def _partition_batch(
    scheme: PartitionScheme, channel: ChannelModel, seed: int, batch: int, size: int
) -> Counter:
    rng = derive_rng(seed, batch)
    messages = rng.choice(len(scheme.distribution.probs), size=size, p=scheme.distribution.prob_array)
    transmit = scheme.distribution.point_array[messages]
    symbols = scheme.partition.label_of(apply_channel(channel, transmit, rng)[:, 0])
    return Counter(zip(messages.tolist(), symbols.tolist()))


def simulate_partition(
    scheme: PartitionScheme,
    channel: ChannelModel,
    trials: int,
    seed: int,
    settings: SimulationSettings | None = None,
) -> TrialReport:
    """
    Simulate a partition scheme on a scalar channel.

    Messages follow the scheme's input distribution; the SER is the error of the MAP decision read off the empirical
    joint histogram.
    """
    settings = settings or SimulationSettings()
    _check_scalar(channel)
    if trials < 1:
        raise InvalidInputError("trials must be positive.")
    started = time.perf_counter()
    results = Parallel(n_jobs=settings.jobs)(
        delayed(_partition_batch)(scheme, channel, seed, b, size) for b, size in _batches(trials, settings.batch_size)
    )
    counter: Counter = Counter()
    for batch_counts in results:
        counter.update(batch_counts)
    joint = np.zeros((len(scheme.distribution.probs), scheme.partition.n_labels), dtype=np.int64)
    for (message, symbol), count in counter.items():
        joint[message, symbol] += count
    ser = 1.0 - joint.max(axis=0).sum() / trials
    return TrialReport(
        label=scheme.label,
        power=channel.power,
        trials=trials,
        ser=ser,
        ci95_ser=ci95(ser, trials),
        empirical_mi_bits=empirical_mi(joint),
        seed=seed,
        wall_ms=int(round((time.perf_counter() - started) * 1000.0)),
    )


def highsnr_sweep(
    scheme: RegionCode | PartitionScheme,
    channel: ChannelModel,
    power_grid: Sequence[float],
    trials: int,
    seed: int,
    settings: SimulationSettings | None = None,
    label: str | None = None,
) -> list[TrialReport]:
    """
    Simulate a scheme at every power of an increasing grid with the same seed.

    The scheme is normalized to unit average power and scaled by ``sqrt(P)``; comparators scale covariantly so the
    partition geometry stays fixed relative to the constellation.

    Raises:
        InvalidInputError: if the grid is empty, not positive or not increasing
    """
    grid = np.asarray(power_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise InvalidInputError(f"Power grid must be positive and increasing: {list(power_grid)}.")
    unit = scheme.normalized()
    reports = []
    for power in grid:
        at_power = channel.with_power(float(power))
        scaled = unit.scaled(math.sqrt(power))
        if isinstance(scaled, PartitionScheme):
            report = simulate_partition(scaled, at_power, trials, seed, settings)
            report = report.model_copy(update={"label": label or scaled.label})
        else:
            report = simulate_code(scaled, at_power, trials, seed, settings, label=label or "code")
        reports.append(report)
    return reports


def analytic_code_mi(code: RegionCode, channel: ChannelModel) -> float:
    """
    Exact mutual information of a scalar code under uniform messages, from the partition its front-end induces.

    Raises:
        InvalidCodeError: if the code is not one-dimensional
    """
    if code.frontend.dim != 1:
        raise InvalidCodeError("Analytic mutual information needs a one-dimensional code.")
    gain = _check_scalar(channel)
    part = induced_partition_1d(code.frontend)
    dmc = dmc_from_partition(gain, code.points[:, 0], part, noise_std=math.sqrt(channel.noise_var))
    uniform = InputDistribution.from_arrays(code.points, np.ones(code.size))
    return mutual_information(dmc, uniform)
