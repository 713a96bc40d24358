import json

import numpy as np
import pytest

from qmimo.channel import ChannelModel
from qmimo.data import (
    ChannelFileProvider,
    FrontendFileProvider,
    RegionCodeFileProvider,
    TableData,
    format_cell,
    to_jsonl,
    to_markdown_table,
    write_atomic,
)
from qmimo.errors import ConfigError
from qmimo.frontend import FrontendSpec


class TestFormatting:
    @pytest.mark.parametrize(
        "value,expected",
        [
            (None, ""),
            (True, "true"),
            (np.bool_(False), "false"),
            (3, "3"),
            (np.int64(7), "7"),
            (0.1, "0.1"),
            (np.float64(1 / 3), repr(1 / 3)),
            ((1, 2.5), "1;2.5"),
            ("I", "I"),
        ],
    )
    def test_format_cell(self, value, expected):
        """Floats keep every digit, sequences are joined by semicolons."""
        assert format_cell(value) == expected

    def test_empty_markdown(self):
        """A table without rows has a placeholder."""
        assert to_markdown_table(["a"], []) == "No results found.\n"


class TestTableData:
    @pytest.fixture
    def table(self) -> TableData:
        """Rate-like rows."""
        return TableData.from_rows(["scenario", "rate_bits"], [("I", 0.5), ("linear", 0.75)])

    def test_markdown(self, table):
        """Header, separator and one line per row."""
        assert table.to_md() == "| scenario | rate_bits |\n| --- | --- |\n| I | 0.5 |\n| linear | 0.75 |\n"

    def test_csv_with_comment(self, table):
        """The comment line comes first and lines end with LF."""
        text = table.to_csv(comment="qmimo rates 2026")
        assert text.splitlines()[0] == "# qmimo rates 2026"
        assert "\r" not in text
        assert TableData.from_csv_str(text).rows == [["I", "0.5"], ["linear", "0.75"]]

    def test_column(self, table):
        """Columns are addressed by header."""
        assert table.column("scenario") == ["I", "linear"]
        with pytest.raises(ValueError):
            table.column("missing")

    def test_from_dicts(self):
        """Missing keys become empty cells."""
        table = TableData.from_dicts([{"a": 1, "b": 2}, {"a": 3}])
        assert table.headers == ["a", "b"]
        assert table.rows == [[1, 2], [3, None]]
        assert TableData.from_dicts([{"a": 1, "b": 2}], headers=["b"]).rows == [[2]]

    def test_invalid(self):
        """Headers are required and rows must match them."""
        with pytest.raises(ValueError):
            TableData([], [])
        with pytest.raises(ValueError):
            TableData(["a", "b"], [[1]])
        with pytest.raises(ValueError):
            TableData.from_csv_str("# only a comment\n")


class TestWriting:
    def test_write_atomic(self, tmp_path):
        """Parents are created and no temporary file is left behind."""
        target = write_atomic(tmp_path / "out" / "report.csv", "a,b\n1,2\n")
        assert target.read_text() == "a,b\n1,2\n"
        write_atomic(target, "a\n")
        assert target.read_text() == "a\n"
        assert [p.name for p in target.parent.iterdir()] == ["report.csv"]

    def test_to_jsonl(self):
        """One sorted JSON object per line, models dumped in JSON mode."""
        channel = ChannelModel.identity(1)
        lines = to_jsonl([{"b": 1, "a": 2}, channel]).splitlines()
        assert lines[0] == '{"a": 2, "b": 1}'
        assert ChannelModel.model_validate(json.loads(lines[1])) == channel
        assert to_jsonl([]) == ""


class TestFileProviders:
    def test_channel(self, tmp_path):
        """Channel files validate into models."""
        path = tmp_path / "channel.json"
        path.write_text(json.dumps({"n_t": 2, "n_r": 1, "h": [[1.0, 0.5]], "power": 10.0}))
        provider = ChannelFileProvider(path)
        channel = provider()
        assert channel.n_t == 2
        assert channel.power == 10.0
        assert provider.name == f"ChannelFileProvider for {path}"
        assert "ChannelModel" in provider.description

    def test_missing_file(self, tmp_path):
        """Missing files are configuration errors."""
        with pytest.raises(ConfigError):
            ChannelFileProvider(tmp_path / "nope.json").run()

    def test_invalid_content(self, tmp_path):
        """Shape mismatches are reported as configuration errors."""
        path = tmp_path / "channel.json"
        path.write_text(json.dumps({"n_t": 2, "n_r": 1, "h": [[1.0]]}))
        with pytest.raises(ConfigError):
            ChannelFileProvider(path).run()

    def test_frontend(self, tmp_path, quadratic_toy):
        """Front-end files round-trip through JSON."""
        path = tmp_path / "frontend.json"
        path.write_text(quadratic_toy.frontend.model_dump_json())
        assert FrontendFileProvider(path)() == quadratic_toy.frontend
        assert isinstance(FrontendFileProvider(path)(), FrontendSpec)

    def test_region_code(self, tmp_path, linear_toy):
        """Region code files round-trip through JSON."""
        path = write_atomic(tmp_path / "code.json", linear_toy.model_dump_json())
        assert RegionCodeFileProvider(path)() == linear_toy
