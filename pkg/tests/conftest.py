"""Shared pytest fixtures for the qmimo tests."""

import math

import pytest
from scipy import stats

from qmimo.channel import ChannelModel
from qmimo.geometry import toy_code
from qmimo.settings import OptimizerSettings


@pytest.fixture(scope="session")
def fast_settings() -> OptimizerSettings:
    """Coarse optimizer settings that keep threshold searches under a second."""
    return OptimizerSettings(
        candidate_points=33,
        grid_points=33,
        starts=2,
        refinements=1,
        rounds=2,
        ba_max_iter=2000,
        power_resolution=5,
    )


@pytest.fixture
def siso() -> ChannelModel:
    """Unit-gain scalar channel at unit power and unit noise."""
    return ChannelModel.identity(1)


@pytest.fixture(scope="session")
def sign_capacity() -> float:
    """Rate of antipodal inputs through a sign quantizer at unit SNR, ``1 - h_b(Phi(-1))``."""
    p = stats.norm.cdf(-1.0)
    return 1.0 + p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p)


@pytest.fixture
def linear_toy():
    """Three-point code read by ``y > 0`` and ``y > 1``."""
    return toy_code("linear")


@pytest.fixture
def quadratic_toy():
    """Four-point code read by ``y > 0`` and ``y**2 > 1``."""
    return toy_code("quadratic")
