import csv
import json
import os
import tempfile
from collections.abc import Iterable, Sequence
from io import StringIO
from pathlib import Path
from typing import TypeVar

import numpy as np
from pydantic import BaseModel, ValidationError

from qmimo.base.provider import BaseProvider
from qmimo.channel import ChannelModel
from qmimo.errors import ConfigError
from qmimo.frontend import FrontendSpec
from qmimo.geometry import RegionCode

ModelType = TypeVar("ModelType", bound=BaseModel)


def format_cell(value) -> str:
    """Render one table value: exact ``repr`` floats, integers as digits, sequences joined by ``;``."""
    if value is None:
        return ""
    if isinstance(value, bool | np.bool_):
        return "true" if value else "false"
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return repr(float(value))
    if isinstance(value, list | tuple | np.ndarray):
        return ";".join(format_cell(v) for v in value)
    return str(value)


def to_markdown_table(headers: list[str], rows: list[list]) -> str:
    """Convert headers and rows to a markdown table format."""
    result = "No results found.\n"

    if rows:
        result = "| " + " | ".join(headers) + " |\n"
        result += "| " + " | ".join(["---"] * len(headers)) + " |\n"

        for row in rows:
            result += "| " + " | ".join(format_cell(value) for value in row) + " |\n"

    return result


class TableData:
    """Container for tabular report data that can be rendered as markdown or CSV."""

    def __init__(self, headers: list[str], rows: list[list]) -> None:
        if not headers:
            raise ValueError("Headers must be non-empty.")
        if any(len(row) != len(headers) for row in rows):
            raise ValueError(f"Every row must have {len(headers)} values.")
        self.headers = list(headers)
        self.rows = [list(row) for row in rows]

    @classmethod
    def from_rows(cls, headers: list[str], rows: Iterable[Sequence]) -> "TableData":
        """Create TableData directly from headers and rows."""
        return cls(headers, [list(row) for row in rows])

    @classmethod
    def from_dicts(cls, data: list[dict], headers: list[str] | None = None) -> "TableData":
        """Create TableData from a list of dictionaries; missing keys become empty cells."""
        if headers is None:
            headers = list(data[0].keys()) if data else []
        rows = [[row.get(h) for h in headers] for row in data]
        return cls(headers, rows)

    @classmethod
    def from_csv_str(cls, csv_text: str) -> "TableData":
        """Create TableData from CSV text, skipping ``#`` comment lines."""
        headers, rows = [], []
        body = "\n".join(line for line in csv_text.splitlines() if not line.startswith("#"))

        if body.strip():
            reader = csv.reader(StringIO(body))

            if row_data := list(reader):
                headers = row_data[0]
                rows = row_data[1:]

        return cls(headers, rows)

    def column(self, header: str) -> list:
        """Values of one column."""
        index = self.headers.index(header)
        return [row[index] for row in self.rows]

    def to_md(self) -> str:
        """Convert to markdown table format."""
        return to_markdown_table(self.headers, self.rows)

    def to_csv(self, comment: str | None = None) -> str:
        """CSV text with LF line endings and an optional leading ``# comment`` line."""
        buffer = StringIO()
        if comment:
            buffer.write(f"# {comment}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.headers)
        writer.writerows([format_cell(value) for value in row] for row in self.rows)
        return buffer.getvalue()


def write_atomic(path: str | Path, text: str) -> Path:
    """Write ``text`` to a temporary file beside ``path`` and move it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile("w", dir=path.parent, prefix=f".{path.name}.", delete=False, newline="") as f:
        f.write(text)
        tmp = Path(f.name)
    try:
        os.replace(tmp, path)
    except OSError:
        tmp.unlink(missing_ok=True)
        raise
    return path


def to_jsonl(records: Iterable[BaseModel | dict]) -> str:
    """One JSON object per line."""
    lines = []
    for record in records:
        payload = record.model_dump(mode="json") if isinstance(record, BaseModel) else record
        lines.append(json.dumps(payload, sort_keys=True, default=format_cell))
    return "".join(f"{line}\n" for line in lines)


class JsonModelProvider(BaseProvider[ModelType]):
    """Loads and validates one pydantic model from a JSON file."""

    model: type[BaseModel]

    def __init__(self, file: str | Path) -> None:
        self.file = Path(file)

    @property
    def name(self) -> str:
        """Get the name of the provider."""
        return f"{self.__class__.__name__} for {self.file}"

    @property
    def description(self) -> str:
        """Get informational context about the provider."""
        return f"Loads a {self.model.__name__} from the JSON file {self.file}."

    def run(self, *args, **kwargs) -> ModelType:
        """Read and validate the file."""
        if not self.file.is_file():
            raise ConfigError(f"File not found: {self.file}")
        try:
            return self.model.model_validate_json(self.file.read_text(*args, **kwargs))
        except ValidationError as e:
            raise ConfigError(f"Invalid {self.model.__name__} in {self.file}: {e}") from e


class ChannelFileProvider(JsonModelProvider[ChannelModel]):
    """A channel file: ``{"n_t": .., "n_r": .., "h": [[..]], "power": .., "noise_var": ..}``."""

    model = ChannelModel


class FrontendFileProvider(JsonModelProvider[FrontendSpec]):
    """A comparator bank file in the JSON form of `FrontendSpec`."""

    model = FrontendSpec


class RegionCodeFileProvider(JsonModelProvider[RegionCode]):
    """A region code file in the JSON form of `RegionCode`."""

    model = RegionCode
