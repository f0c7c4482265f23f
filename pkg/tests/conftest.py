"""Shared fixtures: small generated scenarios and random single-cell problems."""

from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np
import pytest

from load_coupled_power.network.generator import ScenarioGenConfig, generate_scenario
from load_coupled_power.network.scenario import NetworkScenario
from load_coupled_power.solvers.single_cell import SingleCellProblem

NOISE = 4e-21
BANDWIDTH = 18e6


@pytest.fixture
def small_config() -> ScenarioGenConfig:
    """One three-sector site, two users per cell."""
    return ScenarioGenConfig(site_count=1, sectors_per_site=3, users_per_cell=2, seed=3)


@pytest.fixture
def small_scenario(small_config: ScenarioGenConfig) -> NetworkScenario:
    return generate_scenario(small_config)


@pytest.fixture
def medium_scenario() -> NetworkScenario:
    """Three omni sites with four users each."""
    return generate_scenario(
        ScenarioGenConfig(site_count=3, sectors_per_site=1, users_per_cell=4, seed=11)
    )


@pytest.fixture
def single_cell_scenario() -> NetworkScenario:
    return generate_scenario(
        ScenarioGenConfig(site_count=1, sectors_per_site=1, users_per_cell=5, seed=7)
    )


@pytest.fixture
def make_problem() -> Callable[..., SingleCellProblem]:
    """Factory for random single-cell problems with realistic magnitudes."""

    def _make(
        rng: np.random.Generator, users: int, power_cap: float = math.inf
    ) -> SingleCellProblem:
        gains = 10.0 ** rng.uniform(-12.0, -9.0, users)
        demands = rng.uniform(0.2e6, 2.0e6, users)
        return SingleCellProblem(gains, demands, NOISE, BANDWIDTH, power_cap)

    return _make


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    """Run directory; also the settings default so nothing lands in ./results."""
    from load_coupled_power.config.settings import settings

    monkeypatch.setattr(settings, "output_dir", str(tmp_path / "default"))
    return tmp_path / "run"
