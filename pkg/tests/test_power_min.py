"""Tests for the distributed power-minimisation fixed point."""

import math

import numpy as np
import pytest

from load_coupled_power.network.model import user_rates, validate_allocation
from load_coupled_power.oracle import analytic_2cell_fixed_point, symmetric_two_cell_scenario
from load_coupled_power.solvers.power_min import dtapc_pm, interference_map, per_cell_pm
from load_coupled_power.solvers.properties import fixed_point_residual
from load_coupled_power.solvers.single_cell import SingleCellProblem, pm_sc
from load_coupled_power.solvers.status import SolveStatus

NOISE = 4e-21
BANDWIDTH = 18e6
ANALYTIC_DEMAND = 1.8e6
ANALYTIC_GAIN = 1e-10
# 2^(D/B) - 1 for D/B = 0.1
ANALYTIC_C = math.expm1(math.log(2.0) * ANALYTIC_DEMAND / BANDWIDTH)


def _analytic_case(rho):
    g_cross = rho * ANALYTIC_GAIN / ANALYTIC_C
    sc = symmetric_two_cell_scenario(ANALYTIC_GAIN, g_cross, ANALYTIC_DEMAND, BANDWIDTH, NOISE)
    expected = analytic_2cell_fixed_point(ANALYTIC_GAIN, g_cross, ANALYTIC_DEMAND, BANDWIDTH, NOISE)
    return sc, expected


@pytest.mark.parametrize("rho", np.linspace(0.5, 1.5, 50))
def test_two_cell_analytic_family(rho):
    sc, expected = _analytic_case(rho)
    result = dtapc_pm(sc, tol=1e-12, record_trace=False)
    if rho < 1.0:
        assert result.solved
        np.testing.assert_allclose(result.q, expected, rtol=1e-8)
    else:
        assert expected is None
        assert result.status is SolveStatus.INFEASIBLE
        assert result.reason == "diverged"
        assert result.offending_cells


def test_single_cell_reduces_to_closed_form(single_cell_scenario):
    result = dtapc_pm(single_cell_scenario)
    closed = pm_sc(SingleCellProblem.from_scenario(single_cell_scenario))
    assert result.solved
    assert result.q[0] == pytest.approx(closed.sum_power, rel=1e-12)
    np.testing.assert_allclose(result.allocation.loads, closed.loads, rtol=1e-12)


def test_update_with_silent_neighbours_is_isolated_cell(small_scenario):
    silent = np.zeros(small_scenario.cell_count)
    upd = per_cell_pm(1, silent, small_scenario)
    closed = pm_sc(SingleCellProblem.from_scenario(small_scenario, 1))
    assert upd.q == pytest.approx(closed.sum_power, rel=1e-12)


def test_own_entry_is_ignored(small_scenario):
    q = np.full(small_scenario.cell_count, 1e-9)
    louder = q.copy()
    louder[0] = 1.0
    assert per_cell_pm(0, q, small_scenario).q == per_cell_pm(0, louder, small_scenario).q


def test_solution_meets_every_constraint(small_scenario):
    result = dtapc_pm(small_scenario)
    assert result.solved
    alloc = result.allocation
    report = validate_allocation(alloc, small_scenario, tol=1e-6)
    assert report.ok, report.errors
    np.testing.assert_array_equal(alloc.rates, small_scenario.demands)
    np.testing.assert_allclose(alloc.cell_loads(), 1.0, atol=1e-12)
    assert np.all(user_rates(alloc, small_scenario) >= small_scenario.demands * (1.0 - 1e-6))


def test_fixed_point_residual_is_small(medium_scenario):
    result = dtapc_pm(medium_scenario, tol=1e-12)
    assert result.solved
    assert fixed_point_residual(medium_scenario, result.q) <= 1e-9


def test_iterates_decrease_from_the_cap(small_scenario):
    result = dtapc_pm(small_scenario)
    q = np.array([it.q for it in result.trace])
    assert np.all(np.diff(q, axis=0) <= 1e-10 * q[:-1])
    assert len(result.trace) == result.iterations + 1


def test_gauss_seidel_reaches_same_point(medium_scenario):
    jacobi = dtapc_pm(medium_scenario, tol=1e-12)
    seidel = dtapc_pm(medium_scenario, tol=1e-12, schedule="gauss-seidel")
    assert seidel.solved
    np.testing.assert_allclose(seidel.q, jacobi.q, rtol=1e-8)


def test_interference_map_is_monotone(small_scenario):
    q = small_scenario.q_max * 0.1
    assert np.all(interference_map(small_scenario, 2.0 * q) >= interference_map(small_scenario, q))


def test_cap_violation_reports_cells(small_scenario):
    q_star = dtapc_pm(small_scenario).q
    tight = small_scenario.with_power_limits(0.5 * q_star * small_scenario.bandwidth)
    result = dtapc_pm(tight)
    assert result.status is SolveStatus.INFEASIBLE
    assert result.reason == "power-cap"
    assert result.converged
    assert result.offending_cells == list(range(small_scenario.cell_count))
    np.testing.assert_allclose(result.excess, 0.5 * q_star, rtol=1e-6)
    assert result.allocation is not None


def test_iteration_limit(small_scenario):
    result = dtapc_pm(small_scenario, max_iter=1)
    assert result.reason == "max-iter"
    assert not result.converged


def test_invalid_arguments(small_scenario):
    with pytest.raises(ValueError):
        dtapc_pm(small_scenario, tol=0.0)
    with pytest.raises(ValueError):
        dtapc_pm(small_scenario, initial_q=np.ones(small_scenario.cell_count + 1))
    with pytest.raises(ValueError):
        dtapc_pm(small_scenario, schedule="random")


def test_sum_power_in_watts(small_scenario):
    result = dtapc_pm(small_scenario)
    assert result.sum_power_watts(small_scenario.bandwidth) == pytest.approx(
        result.q.sum() * small_scenario.bandwidth
    )


def _strong_link_case(rho):
    gain = 1e-5
    g_cross = rho * gain / ANALYTIC_C
    sc = symmetric_two_cell_scenario(gain, g_cross, ANALYTIC_DEMAND, BANDWIDTH, NOISE)
    return sc, analytic_2cell_fixed_point(gain, g_cross, ANALYTIC_DEMAND, BANDWIDTH, NOISE)


@pytest.mark.parametrize("rho", [1.0, 1.0 - 1e-9])
def test_slow_contraction_is_not_reported_as_converged(rho):
    sc, _ = _strong_link_case(rho)
    result = dtapc_pm(sc, max_iter=300, record_trace=False)
    assert not result.solved
    assert not result.converged
    assert result.status is SolveStatus.INFEASIBLE
    assert result.reason == "max-iter"


def test_strong_link_fixed_point_within_tolerance():
    sc, expected = _strong_link_case(0.99)
    result = dtapc_pm(sc, record_trace=False)
    assert result.solved
    np.testing.assert_allclose(result.q, expected, rtol=2e-8)


def test_allocation_is_the_update_at_the_final_point(small_scenario):
    sc = small_scenario
    result = dtapc_pm(sc, tol=1e-10, initial_q=np.zeros(sc.cell_count), record_trace=False)
    assert result.solved
    np.testing.assert_allclose(
        result.allocation.cell_powers().values, interference_map(sc, result.q), rtol=1e-12
    )
    assert np.all(user_rates(result.allocation, sc) >= sc.demands * (1.0 - 1e-7))
