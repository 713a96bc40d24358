import json

import pytest

from qmimo.config import DECADE_SWEEP, ExperimentConfig, load_config
from qmimo.errors import ConfigError
from qmimo.rates import RateFamily


class TestExperimentConfig:
    def test_defaults(self):
        """Only the command and the seed are required."""
        config = ExperimentConfig(command="rates", seed=0)
        assert config.scenarios == (RateFamily.PROJECTION, RateFamily.LINEAR, RateFamily.QUADRATIC)
        assert config.power_grid == (1.0,)

    @pytest.mark.parametrize(
        "fields,grid",
        [
            ({"command": "highsnr"}, DECADE_SWEEP),
            ({"command": "simulate"}, (400.0,)),
            ({"command": "simulate", "powers": (1.0, 2.0)}, (1.0, 2.0)),
            ({"command": "counts"}, (1.0,)),
        ],
    )
    def test_power_grid(self, fields, grid):
        """Each command has its own default grid; explicit powers win."""
        assert ExperimentConfig(seed=0, **fields).power_grid == grid

    @pytest.mark.parametrize("powers", [(), (0.0, 1.0), (2.0, 1.0), (1.0, 1.0)])
    def test_invalid_powers(self, powers):
        """Powers are positive and strictly increasing."""
        with pytest.raises(ValueError):
            ExperimentConfig(command="rates", seed=0, powers=powers)

    def test_seed_required(self):
        """Runs are never seeded implicitly."""
        with pytest.raises(ValueError):
            ExperimentConfig(command="rates")

    def test_unknown_field(self):
        """Typos in config files are rejected."""
        with pytest.raises(ValueError):
            ExperimentConfig(command="rates", seed=0, sead=1)

    def test_settings_carry_seed_and_jobs(self):
        """The run's seed and worker cap reach the nested settings."""
        config = ExperimentConfig(command="rates", seed=5, jobs=3)
        assert config.optimizer_settings.seed == 5
        assert config.optimizer_settings.jobs == 3
        assert config.simulation_settings.jobs == 3

    def test_settings_reject_zero_workers(self):
        """Loading accepts any worker count; the settings built from it reject zero."""
        config = ExperimentConfig(command="rates", seed=0, jobs=0)
        with pytest.raises(ValueError):
            config.optimizer_settings
        with pytest.raises(ValueError):
            config.simulation_settings
        assert ExperimentConfig(command="rates", seed=0, jobs=-1).simulation_settings.jobs == -1


class TestLoadConfig:
    def test_file_and_overrides(self, tmp_path):
        """Overrides replace file values; None overrides are ignored."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"command": "counts", "seed": 1, "nq_max": 4}))
        config = load_config(path, seed=9, nq_max=None, rank_max=1)
        assert (config.seed, config.nq_max, config.rank_max) == (9, 4, 1)

    def test_overrides_only(self):
        """A config can come entirely from the command line."""
        assert load_config(command="approx", seed=2).samples == 10_000

    def test_missing_file(self, tmp_path):
        """Missing files are configuration errors."""
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.json")

    @pytest.mark.parametrize("text", ["{not json", "[1, 2]", '{"command": "rates"}'])
    def test_malformed(self, tmp_path, text):
        """Bad JSON, non-objects and invalid configs all raise ConfigError."""
        path = tmp_path / "config.json"
        path.write_text(text)
        with pytest.raises(ConfigError):
            load_config(path)

    def test_referenced_files_must_exist(self, tmp_path):
        """Channel and code paths are checked on load."""
        with pytest.raises(ConfigError):
            load_config(command="rates", seed=0, channel=str(tmp_path / "missing.json"))
