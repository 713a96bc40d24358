"""Tunable numerical settings shared by the optimizer and the simulator."""

from typing import Annotated, Literal

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, PositiveInt


def _check_jobs(jobs: int) -> int:
    if jobs == 0:
        raise ValueError("jobs must be nonzero; negative values count back from the number of CPUs.")
    return jobs


WorkerCount = Annotated[int, AfterValidator(_check_jobs)]


class OptimizerSettings(BaseModel):
    """
    Settings of the rate optimizer.

    Attributes:
        candidate_points (int): equispaced Blahut-Arimoto candidate inputs in [-c*sqrt(P), c*sqrt(P)]
        candidate_span (float): the factor ``c`` above
        ba_tol (float): stop once the per-iteration mutual information gain drops below this (bits)
        ba_max_iter (int): iteration cap of a single Blahut-Arimoto run
        starts (int): seeded multi-starts of the threshold search
        grid_points (int): grid size per boundary coordinate
        refinements (int): grid refinement passes after the coarse pass
        shrink (float): grid half-width factor applied at every refinement
        rounds (int): partition/distribution alternations per grid level
        quadratic_layout (str): ``mixed`` (2n intervals, distinct labels) or ``all-quadratic``
            (2n + 1 intervals, outermost intervals share a label)
        power_resolution (int | None): power-simplex points per dimension; ``None`` selects 21 for
            up to three subchannels and 11 for four
        seed (int): root seed of the multi-starts
        jobs (int): joblib worker cap, nonzero
    """

    model_config = ConfigDict(frozen=True)

    candidate_points: int = Field(default=129, ge=3)
    candidate_span: float = Field(default=3.0, gt=0.0)
    ba_tol: float = Field(default=1e-9, gt=0.0)
    ba_max_iter: PositiveInt = 5000
    starts: PositiveInt = 8
    grid_points: int = Field(default=257, ge=3)
    refinements: int = Field(default=2, ge=0)
    shrink: float = Field(default=0.25, gt=0.0, lt=1.0)
    rounds: PositiveInt = 3
    quadratic_layout: Literal["mixed", "all-quadratic"] = "mixed"
    power_resolution: int | None = Field(default=None, ge=2)
    seed: int = 0
    jobs: WorkerCount = 1


class SimulationSettings(BaseModel):
    """Settings of the Monte-Carlo simulator; ``batch_size`` fixes the random streams, ``jobs`` only the pool."""

    model_config = ConfigDict(frozen=True)

    batch_size: PositiveInt = 16384
    jobs: WorkerCount = 1
