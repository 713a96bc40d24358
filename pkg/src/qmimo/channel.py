"""Real MIMO channel Y = hX + N, its SVD into parallel scalar subchannels, and the power constraint."""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator

from qmimo.errors import InvalidInputError

if TYPE_CHECKING:
    from qmimo.rates import InputDistribution

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10
POWER_TOL = 1e-9


class ChannelModel(BaseModel):
    """
    Real MIMO channel with perfectly known gains.

    Attributes:
        n_t (int): transmit antennas
        n_r (int): receive antennas
        h (tuple): row-major gain matrix with ``n_r`` rows of ``n_t`` entries
        power (float): average power budget P of ``(1/n_t) * sum_i E[X_i^2]``
        noise_var (float): per-antenna Gaussian noise variance, zero for the noiseless limit
    """

    model_config = ConfigDict(frozen=True)

    n_t: PositiveInt
    n_r: PositiveInt
    h: tuple[tuple[float, ...], ...]
    power: PositiveFloat = 1.0
    noise_var: float = Field(default=1.0, ge=0.0)

    @model_validator(mode="after")
    def _check_matrix(self) -> "ChannelModel":
        if len(self.h) != self.n_r or any(len(row) != self.n_t for row in self.h):
            raise ValueError(f"h must have shape {self.n_r} x {self.n_t}.")
        if not np.all(np.isfinite(np.asarray(self.h, dtype=float))):
            raise ValueError("h must have finite entries.")
        return self

    @classmethod
    def from_matrix(cls, h, power: float = 1.0, noise_var: float = 1.0) -> "ChannelModel":
        """Create a channel from any 2-D array-like gain matrix."""
        matrix = np.atleast_2d(np.asarray(h, dtype=float))
        rows = tuple(tuple(float(v) for v in row) for row in matrix)
        return cls(n_t=matrix.shape[1], n_r=matrix.shape[0], h=rows, power=power, noise_var=noise_var)

    @classmethod
    def identity(cls, size: int, power: float = 1.0, noise_var: float = 1.0) -> "ChannelModel":
        """Create the ``size`` x ``size`` identity channel."""
        return cls.from_matrix(np.eye(size), power=power, noise_var=noise_var)

    @property
    def matrix(self) -> np.ndarray:
        """Gain matrix as an array."""
        return np.asarray(self.h, dtype=float)

    @property
    def total_power(self) -> float:
        """Total budget ``n_t * P`` shared by all transmit dimensions."""
        return self.n_t * self.power

    def with_power(self, power: float) -> "ChannelModel":
        """Copy of the channel with a new power budget."""
        return self.model_copy(update={"power": power})

    def with_noise(self, noise_var: float) -> "ChannelModel":
        """Copy of the channel with a new noise variance."""
        return self.model_copy(update={"noise_var": noise_var})


@dataclass(frozen=True)
class SubchannelSet:
    """
    Parallel scalar subchannels ``Y_k = sigma_k X_k + N_k`` realizing ``h = U diag(sigmas) V^T``.

    Attributes:
        sigmas (np.ndarray): ``s`` singular values above the rank tolerance, non-increasing
        left_basis (np.ndarray): ``n_r x s`` matrix U with orthonormal columns
        right_basis (np.ndarray): ``n_t x s`` matrix V with orthonormal columns
    """

    sigmas: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    @property
    def s(self) -> int:
        """Number of subchannels, the numerical rank of h."""
        return int(self.sigmas.size)

    def reconstruct(self) -> np.ndarray:
        """Return ``U diag(sigmas) V^T``."""
        return (self.left_basis * self.sigmas) @ self.right_basis.T

    def project_output(self, y: np.ndarray) -> np.ndarray:
        """Project receive vectors onto the left basis, ``U^T y``."""
        return np.asarray(y, dtype=float) @ self.left_basis

    def precode_input(self, x_tilde: np.ndarray) -> np.ndarray:
        """Map subchannel inputs to transmit vectors, ``V x_tilde``."""
        return np.asarray(x_tilde, dtype=float) @ self.right_basis.T


def svd_decompose(channel: ChannelModel) -> SubchannelSet:
    """
    Decompose the channel into parallel non-interfering scalar subchannels.

    Singular values below ``RANK_TOL * sigma_max`` are treated as zero.

    Args:
        channel (ChannelModel): channel to decompose

    Returns:
        SubchannelSet with ``s = rank(h)`` subchannels

    Raises:
        InvalidInputError: if the gain matrix has non-finite entries
    """
    h = np.asarray(channel.h, dtype=float)
    if not np.all(np.isfinite(h)):
        raise InvalidInputError("Channel matrix has non-finite entries.")

    u, sigmas, vt = np.linalg.svd(h, full_matrices=False)
    cutoff = RANK_TOL * sigmas[0] if sigmas.size and sigmas[0] > 0 else np.inf
    s = int(np.count_nonzero(sigmas > cutoff))
    logger.debug("SVD of %dx%d channel: sigmas=%s, rank=%d", channel.n_r, channel.n_t, sigmas, s)
    return SubchannelSet(sigmas=sigmas[:s].copy(), left_basis=u[:, :s].copy(), right_basis=vt[:s].T.copy())


def apply_channel(channel: ChannelModel, x, rng: np.random.Generator) -> np.ndarray:
    """
    Pass transmit vectors through the channel, ``y = h x + n`` with iid Gaussian noise.

    Accepts a single vector of length ``n_t`` or a batch of shape ``(N, n_t)``.

    Raises:
        InvalidInputError: if the input length is not ``n_t`` or the input is not finite
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (channel.n_t,) or x.ndim > 2:
        raise InvalidInputError(f"Expected input of length {channel.n_t}, got shape {x.shape}.")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("Channel input must be finite.")

    noiseless = x @ channel.matrix.T
    noise = rng.normal(0.0, np.sqrt(channel.noise_var), size=noiseless.shape)
    return noiseless + noise


def validate_power(dist: "InputDistribution", channel: ChannelModel) -> bool:
    """Check the average power constraint ``(1/n_t) sum_j p_j ||x_j||^2 <= P``."""
    points = dist.point_array.reshape(len(dist.probs), -1)
    if points.shape[1] != channel.n_t:
        raise InvalidInputError(f"Distribution points have dimension {points.shape[1]}, expected {channel.n_t}.")
    average = float(np.asarray(dist.probs) @ np.sum(points**2, axis=1)) / channel.n_t
    return average <= channel.power + POWER_TOL
