"""Tests for the uniform-power baseline and its comparison with the joint scheme."""

import math

import numpy as np
import pytest

from load_coupled_power.network.generator import ScenarioGenConfig, generate_scenario
from load_coupled_power.network.scenario import NetworkScenario
from load_coupled_power.oracle import symmetric_two_cell_scenario
from load_coupled_power.solvers.power_min import dtapc_pm, per_cell_pm
from load_coupled_power.solvers.properties import find_feasibility_edge
from load_coupled_power.solvers.status import SolveStatus
from load_coupled_power.solvers.uniform_power import opv_pm, per_cell_opv

B = 18e6
NOISE = 4e-21


def test_one_user_per_cell_matches_joint_scheme():
    sc = symmetric_two_cell_scenario(1e-10, 5e-10, 1.8e6)
    joint = dtapc_pm(sc, tol=1e-12)
    uniform = opv_pm(sc, tol=1e-12)
    assert uniform.solved
    np.testing.assert_allclose(uniform.q, joint.q, rtol=1e-8)


def test_update_is_full_load_at_one_density(small_scenario):
    q = 0.01 * small_scenario.q_max
    for i in range(small_scenario.cell_count):
        upd = per_cell_opv(i, q, small_scenario)
        assert not upd.saturated
        assert upd.loads.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(upd.power / upd.loads, upd.multiplier, rtol=1e-12)


def test_identical_users_split_the_slot():
    cell = NetworkScenario(
        gains=np.array([[1e-10, 1e-10]]),
        serving=np.array([0, 0]),
        demands=np.array([1e6, 1e6]),
        power_limits=np.array([10.0]),
        noise_density=NOISE,
        bandwidth=B,
    )
    upd = per_cell_opv(0, np.zeros(1), cell)
    np.testing.assert_allclose(upd.loads, [0.5, 0.5], rtol=1e-10)
    sinr = upd.multiplier * 1e-10 / NOISE
    assert sinr == pytest.approx(math.expm1(math.log(2.0) * 2e6 / B), rel=1e-10)


def test_never_cheaper_than_joint_update(medium_scenario):
    q = 0.05 * medium_scenario.q_max
    for i in range(medium_scenario.cell_count):
        assert per_cell_pm(i, q, medium_scenario).q <= per_cell_opv(i, q, medium_scenario).q * (
            1.0 + 1e-9
        )


def test_joint_fixed_point_dominates(medium_scenario):
    joint = dtapc_pm(medium_scenario)
    uniform = opv_pm(medium_scenario)
    assert joint.solved and uniform.solved
    assert np.all(joint.q <= uniform.q * (1.0 + 1e-8))
    assert joint.sum_power_density < uniform.sum_power_density


def test_saturation_is_demand_stressed(single_cell_scenario):
    stressed = single_cell_scenario.with_uniform_demand(1e9)
    uniform = opv_pm(stressed)
    assert uniform.status is SolveStatus.INFEASIBLE
    assert uniform.reason == "demand-stressed"
    assert uniform.offending_cells == [0]
    assert dtapc_pm(stressed).status is SolveStatus.INFEASIBLE


def test_savings_at_sixty_percent_of_the_edge():
    savings = []
    for seed in range(20):
        sc = generate_scenario(
            ScenarioGenConfig(site_count=5, sectors_per_site=1, users_per_cell=6, seed=seed)
        )
        loaded = sc.with_uniform_demand(0.6 * find_feasibility_edge(sc))
        joint = dtapc_pm(loaded, record_trace=False)
        uniform = opv_pm(loaded, record_trace=False)
        assert joint.solved, seed
        # power-cap verdicts still carry a converged q
        if not uniform.converged:
            continue
        savings.append(1.0 - joint.sum_power_density / uniform.sum_power_density)
    assert len(savings) >= 10
    assert float(np.median(savings)) >= 0.15


def test_joint_dominates_across_seeds():
    for seed in range(50):
        sc = generate_scenario(
            ScenarioGenConfig(site_count=3, sectors_per_site=1, users_per_cell=3, seed=seed)
        )
        loaded = sc.with_uniform_demand(0.5 * find_feasibility_edge(sc, rel_tol=1e-2))
        joint = dtapc_pm(loaded, record_trace=False)
        uniform = opv_pm(loaded, record_trace=False)
        assert joint.solved, seed
        if not uniform.converged:
            continue
        assert np.all(joint.q <= uniform.q * (1.0 + 1e-8)), seed
        assert joint.sum_power_density < uniform.sum_power_density, seed
