import asyncio
from abc import ABC, abstractmethod
from typing import Generic, TypeVar

InputType = TypeVar("InputType")


class BaseProvider(ABC, Generic[InputType]):
    """
    Source of one validated experiment input: a channel matrix, a comparator bank or a region code.

    Concrete providers read their input from wherever it lives (JSON files in `qmimo.data`) and return the
    pydantic model, raising `ConfigError` when the source is missing or does not validate.

    Properties:
        name (str): provider and source, used in log messages
        description (str): what the provider loads
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Provider and source, e.g. ``ChannelFileProvider for h.json``."""
        raise NotImplementedError

    @property
    @abstractmethod
    def description(self) -> str:
        """One sentence naming the model the provider loads."""
        raise NotImplementedError

    @abstractmethod
    def run(self, *args, **kwargs) -> InputType:
        """Load and validate the input."""
        raise NotImplementedError

    async def arun(self, *args, **kwargs) -> InputType:
        """Load the input in a worker thread, so several channel or code files can be read concurrently."""
        return await asyncio.to_thread(self.run, *args, **kwargs)

    def __call__(self, *args, **kwargs) -> InputType:
        """Shorthand for `run`."""
        return self.run(*args, **kwargs)
