from qmimo.base.experiment import BaseExperiment
from qmimo.base.provider import BaseProvider
from qmimo.base.report import BaseReport, MarkdownReport, ReportSection, TableSection, TextSection

__all__ = [
    "BaseExperiment",
    "BaseProvider",
    "BaseReport",
    "MarkdownReport",
    "ReportSection",
    "TableSection",
    "TextSection",
]
