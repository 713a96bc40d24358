from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Generic, TypeVar

if TYPE_CHECKING:
    from qmimo.config import ExperimentConfig

ResultType = TypeVar("ResultType")


class BaseExperiment(ABC, Generic[ResultType]):
    """
    Abstract base class for batch experiments dispatched by the command line.

    Properties:
        name (str): subcommand name
        description (str): one-line help text

    Methods:
        run: abstract method to be defined by concrete class, executes the experiment for a config
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Get the subcommand name."""
        raise NotImplementedError

    @property
    @abstractmethod
    def description(self) -> str:
        """Get the help text of the subcommand."""
        raise NotImplementedError

    @abstractmethod
    def run(self, config: "ExperimentConfig") -> ResultType:
        """Run the experiment and return its result."""
        raise NotImplementedError

    def __call__(self, config: "ExperimentConfig") -> ResultType:
        """Call the experiment and return the result."""
        return self.run(config)
