"""Achievable rates of MIMO receivers with nonlinear analog front-ends and one-bit ADCs."""

from qmimo.channel import ChannelModel, apply_channel, svd_decompose, validate_power
from qmimo.frontend import FrontendSpec, Partition1D, Scenario, apply_frontend, induced_partition_1d, quantize
from qmimo.geometry import Arrangement, RegionCode, count_regions
from qmimo.polynomial import MultivariatePolynomial, eval_poly
from qmimo.rates import (
    InducedDMC,
    InputDistribution,
    allocate_and_bound,
    blahut_arimoto,
    dmc_from_partition,
    mutual_information,
    optimize_thresholds,
    scenario1_baseline,
)
from qmimo.simulator import TrialReport, empirical_mi, highsnr_sweep, simulate_code

__version__ = "0.1.0"

__all__ = [
    "Arrangement",
    "ChannelModel",
    "FrontendSpec",
    "InducedDMC",
    "InputDistribution",
    "MultivariatePolynomial",
    "Partition1D",
    "RegionCode",
    "Scenario",
    "TrialReport",
    "allocate_and_bound",
    "apply_channel",
    "apply_frontend",
    "blahut_arimoto",
    "count_regions",
    "dmc_from_partition",
    "empirical_mi",
    "eval_poly",
    "highsnr_sweep",
    "induced_partition_1d",
    "mutual_information",
    "optimize_thresholds",
    "quantize",
    "scenario1_baseline",
    "simulate_code",
    "svd_decompose",
    "validate_power",
]
