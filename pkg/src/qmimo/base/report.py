from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from qmimo.data import TableData


class ReportSection(ABC):
    """
    Abstract base class for one section of a markdown report.

    Attributes:
        title (str | None): optional heading of the section

    Methods:
        render: abstract method to be defined in concrete class to generate string; also aliased using `str()`
    """

    def __init__(self, title: str | None = None) -> None:
        """Initialize the section with an optional heading."""
        self.title = title

    def heading(self) -> str:
        """Render the heading line, empty when the section is untitled."""
        return f"## {self.title}\n\n" if self.title else ""

    @abstractmethod
    def render(self) -> str:
        """Render the section as a string."""
        raise NotImplementedError

    def __str__(self) -> str:
        """String representation of the section."""
        return self.render()


class TextSection(ReportSection):
    """A section of free text paragraphs."""

    def __init__(self, body: str, title: str | None = None) -> None:
        super().__init__(title)
        self.body = body.strip()

    def render(self) -> str:
        """Render the heading followed by the text body."""
        return f"{self.heading()}{self.body}\n"


class TableSection(ReportSection):
    """A section holding a markdown table."""

    def __init__(self, table: "TableData", title: str | None = None) -> None:
        super().__init__(title)
        self.table = table

    def render(self) -> str:
        """Render the heading followed by the markdown table."""
        return f"{self.heading()}{self.table.to_md()}"


class BaseReport(ABC):
    """
    Abstract base class for reports composed of sections.

    Attributes:
        sections (ReportSection): list of sections that compose the final document

    Methods:
        add_sections: extend the sections included, ignoring anything that is not a ReportSection
        render: abstract method to be defined in concrete class to generate string; also aliased using `str()`
    """

    def __init__(self, *sections: ReportSection) -> None:
        """Initialize the report with sections."""
        self.sections = list(sections or [])

    def add_sections(self, *sections: ReportSection) -> None:
        """Add variable quantity of sections."""
        self.sections.extend([s for s in sections if isinstance(s, ReportSection)])

    @abstractmethod
    def render(self) -> str:
        """Render the report as a string."""
        raise NotImplementedError

    def __str__(self) -> str:
        """String representation of the report."""
        return self.render()


class MarkdownReport(BaseReport):
    """A titled markdown document."""

    def __init__(self, title: str, *sections: ReportSection) -> None:
        super().__init__(*sections)
        self.title = title

    def render(self) -> str:
        """Render the title and every section separated by blank lines."""
        parts = [f"# {self.title}\n"] + [section.render() for section in self.sections]
        return "\n".join(parts)
