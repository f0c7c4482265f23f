"""Network model: scenarios, allocations, the SINR/rate model and generation."""

from .generator import ScenarioGenConfig, generate_scenario
from .io import dump_allocation, dump_scenario, load_allocation, load_scenario
from .model import (
    cell_power,
    sinr,
    sinr_all,
    user_rate,
    user_rates,
    validate_allocation,
    with_actual_rates,
)
from .scenario import Allocation, CellPowerVector, NetworkScenario

__all__ = [
    "Allocation",
    "CellPowerVector",
    "NetworkScenario",
    "ScenarioGenConfig",
    "cell_power",
    "dump_allocation",
    "dump_scenario",
    "generate_scenario",
    "load_allocation",
    "load_scenario",
    "sinr",
    "sinr_all",
    "user_rate",
    "user_rates",
    "validate_allocation",
    "with_actual_rates",
]
