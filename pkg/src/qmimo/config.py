"""Experiment configuration loaded from JSON with command-line overrides."""

import json
import logging
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, FilePath, PositiveInt, ValidationError, field_validator

from qmimo.errors import ConfigError
from qmimo.rates import RateFamily
from qmimo.settings import OptimizerSettings, SimulationSettings

logger = logging.getLogger(__name__)

DECADE_SWEEP = (1.0, 10.0, 100.0, 1000.0, 10000.0)
TOY_POWER = 400.0

Command = Literal["rates", "highsnr", "counts", "simulate", "approx"]


class ExperimentConfig(BaseModel):
    """
    Everything one CLI run needs. ``seed`` is mandatory; referenced files must exist.

    Attributes:
        command (str): subcommand to run
        seed (int): root seed of every random stream
        out (Path): output directory
        jobs (int): worker cap, validated when copied into the optimizer and simulation settings
        timings (bool): add the ``wall_ms`` column to CSV reports
        channel (Path | None): JSON channel file; the unit-gain SISO channel when omitted
        code (Path | None): JSON region code file for ``simulate``
        toy (str | None): built-in two-comparator code for ``simulate``
        scenarios (tuple[str, ...]): rate families for ``rates``
        n_q (int): ADC budget for ``rates``, ``simulate`` and ``highsnr``
        powers (tuple[float, ...] | None): power grid P, see `power_grid` for the defaults
        trials (int): Monte-Carlo channel uses per simulation
        rank (int): lifted-code rank for ``highsnr``
        degree (int): shattering degree for ``highsnr``
        rank_max (int): largest rank of the ``counts`` grid
        nq_min (int): smallest ADC count of the ``counts`` grid
        nq_max (int): largest ADC count of the ``counts`` grid
        partitions (int): random rectangular partitions per dimension for ``approx``
        samples (int): interior sample points per partition for ``approx``
        bernstein_degrees (tuple[int, ...]): approximation degrees for ``approx``
        optimizer (OptimizerSettings): rate optimizer settings
        simulation (SimulationSettings): simulator settings
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command
    seed: int
    out: Path = Path("out")
    jobs: int = 1
    timings: bool = False
    channel: FilePath | None = None
    code: FilePath | None = None
    toy: Literal["linear", "quadratic"] | None = None
    scenarios: tuple[RateFamily, ...] = (RateFamily.PROJECTION, RateFamily.LINEAR, RateFamily.QUADRATIC)
    n_q: PositiveInt = 1
    powers: tuple[float, ...] | None = None
    trials: PositiveInt = 100_000
    rank: PositiveInt = 1
    degree: PositiveInt = 2
    rank_max: PositiveInt = 2
    nq_min: PositiveInt = 2
    nq_max: PositiveInt = 5
    partitions: PositiveInt = 10
    samples: PositiveInt = 10_000
    bernstein_degrees: tuple[PositiveInt, ...] = (2, 8, 32)
    optimizer: OptimizerSettings = Field(default_factory=OptimizerSettings)
    simulation: SimulationSettings = Field(default_factory=SimulationSettings)

    @field_validator("powers")
    @classmethod
    def _check_powers(cls, powers: tuple[float, ...] | None) -> tuple[float, ...] | None:
        if powers is None:
            return None
        if not powers or any(p <= 0 for p in powers) or list(powers) != sorted(set(powers)):
            raise ValueError("powers must be positive and strictly increasing.")
        return powers

    @property
    def power_grid(self) -> tuple[float, ...]:
        """The configured powers, else 400 for a built-in toy simulation, a decade sweep for ``highsnr`` and 1."""
        if self.powers is not None:
            return self.powers
        if self.command == "highsnr":
            return DECADE_SWEEP
        if self.command == "simulate" and self.code is None:
            return (TOY_POWER,)
        return (1.0,)

    @property
    def optimizer_settings(self) -> OptimizerSettings:
        """Optimizer settings validated with the run's seed and worker cap."""
        return OptimizerSettings.model_validate(self.optimizer.model_dump() | {"seed": self.seed, "jobs": self.jobs})

    @property
    def simulation_settings(self) -> SimulationSettings:
        """Simulation settings validated with the run's worker cap."""
        return SimulationSettings.model_validate(self.simulation.model_dump() | {"jobs": self.jobs})


def load_config(path: str | Path | None = None, **overrides: Any) -> ExperimentConfig:
    """
    Build a config from an optional JSON file, then apply every override that is not ``None``.

    Raises:
        ConfigError: if the file is missing or malformed, or the merged config is invalid
    """
    data: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object.")

    data.update({key: value for key, value in overrides.items() if value is not None})
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(str(e)) from e
    logger.debug("Loaded config: %s", config.model_dump_json())
    return config
