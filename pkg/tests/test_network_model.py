"""Tests for scenarios, allocations and the SINR/rate model."""

import math

import numpy as np
import pytest

from load_coupled_power.errors import ScenarioError
from load_coupled_power.network.model import (
    cell_power,
    sinr,
    sinr_all,
    user_rate,
    user_rates,
    validate_allocation,
    with_actual_rates,
)
from load_coupled_power.network.scenario import Allocation, CellPowerVector, NetworkScenario

NOISE = 4e-21
B = 18e6


@pytest.fixture
def two_cells() -> NetworkScenario:
    # cell 0 serves users 0, 1; cell 1 serves user 2
    return NetworkScenario(
        gains=np.array([[1e-9, 5e-10, 1e-11], [2e-11, 4e-11, 2e-9]]),
        serving=np.array([0, 0, 1]),
        demands=np.array([1e6, 1e6, 1e6]),
        power_limits=np.array([10.0, 10.0]),
        noise_density=NOISE,
        bandwidth=B,
    )


def _alloc(sc, loads, power, rates=None):
    loads = np.asarray(loads, float)
    return Allocation(
        sc.serving, sc.cell_count, loads, np.asarray(power, float),
        np.zeros_like(loads) if rates is None else np.asarray(rates, float),
    )


class TestScenario:
    def test_shapes_and_slices(self, two_cells):
        assert two_cells.cell_count == 2
        assert two_cells.user_count == 3
        assert two_cells.users_of(0) == slice(0, 2)
        assert two_cells.users_of(1) == slice(2, 3)
        np.testing.assert_array_equal(two_cells.users_per_cell, [2, 1])
        np.testing.assert_allclose(two_cells.q_max, 10.0 / B)

    def test_cross_gains_zero_serving_links(self, two_cells):
        cross = two_cells.cross_gains
        assert cross[0, 0] == cross[0, 1] == cross[1, 2] == 0.0
        assert cross[1, 0] == 2e-11

    def test_arrays_are_read_only(self, two_cells):
        with pytest.raises(ValueError):
            two_cells.gains[0, 0] = 1.0

    def test_uniform_demand_keeps_channel(self, two_cells):
        other = two_cells.with_uniform_demand(2.5e6)
        np.testing.assert_array_equal(other.demands, 2.5e6)
        np.testing.assert_array_equal(other.gains, two_cells.gains)

    def test_power_limits_broadcast(self, two_cells):
        np.testing.assert_array_equal(two_cells.with_power_limits(1.0).power_limits, [1.0, 1.0])

    def test_isolated_cell(self, two_cells):
        cell = two_cells.cell(0)
        assert cell.cell_count == 1
        np.testing.assert_array_equal(cell.gains, [[1e-9, 5e-10]])

    @pytest.mark.parametrize(
        "change, match",
        [
            ({"gains": np.array([[1e-9, 0.0, 1e-11], [2e-11, 4e-11, 2e-9]])}, "gains"),
            ({"serving": np.array([0, 1, 0])}, "contiguously"),
            ({"serving": np.array([0, 0, 0])}, "without users"),
            ({"demands": np.array([1e6, -1.0, 1e6])}, "demand"),
            ({"power_limits": np.array([10.0])}, "power_limits"),
            ({"noise_density": 0.0}, "noise"),
        ],
    )
    def test_invalid_scenarios(self, two_cells, change, match):
        fields = {
            "gains": two_cells.gains,
            "serving": two_cells.serving,
            "demands": two_cells.demands,
            "power_limits": two_cells.power_limits,
            "noise_density": two_cells.noise_density,
            "bandwidth": two_cells.bandwidth,
            **change,
        }
        with pytest.raises(ScenarioError, match=match):
            NetworkScenario(**fields)


class TestAllocation:
    def test_power_density_is_zero_without_load(self, two_cells):
        alloc = _alloc(two_cells, [0.0, 1.0, 1.0], [1e-13, 2e-13, 3e-13])
        np.testing.assert_array_equal(alloc.power_density, [0.0, 2e-13, 3e-13])

    def test_cell_aggregates(self, two_cells):
        alloc = _alloc(two_cells, [0.25, 0.5, 1.0], [1e-13, 2e-13, 3e-13])
        np.testing.assert_allclose(alloc.cell_loads(), [0.75, 1.0])
        np.testing.assert_allclose(alloc.cell_powers().values, [3e-13, 3e-13])
        assert cell_power(alloc, 0) == pytest.approx(3e-13)

    def test_rejects_negative_entries(self, two_cells):
        with pytest.raises(ValueError):
            _alloc(two_cells, [-0.1, 0.5, 1.0], [0.0, 0.0, 0.0])
        with pytest.raises(ValueError):
            _alloc(two_cells, [0.5, 0.5, 1.0], [0.0, -1e-13, 0.0])

    def test_with_cell_replaces_one_cell(self, two_cells):
        alloc = _alloc(two_cells, [0.5, 0.5, 1.0], [1e-13, 1e-13, 1e-13])
        new = alloc.with_cell(two_cells.users_of(1), [0.9], [5e-13], [7.0])
        np.testing.assert_array_equal(new.loads, [0.5, 0.5, 0.9])
        np.testing.assert_array_equal(new.rates, [0.0, 0.0, 7.0])
        np.testing.assert_array_equal(alloc.loads, [0.5, 0.5, 1.0])

    def test_cell_power_vector_others(self):
        q = CellPowerVector(np.array([1.0, 2.0, 3.0]))
        np.testing.assert_array_equal(q.others(1), [1.0, 0.0, 3.0])
        assert q.total == 6.0
        assert len(q) == 3


class TestSinrAndRates:
    def test_sinr_formula(self, two_cells):
        alloc = _alloc(two_cells, [0.5, 0.5, 1.0], [2e-13, 1e-13, 4e-13])
        q1 = 4e-13
        expected = (2e-13 / 0.5) * 1e-9 / (q1 * 2e-11 + NOISE)
        assert sinr(alloc, two_cells, 0, 0) == pytest.approx(expected, rel=1e-14)
        np.testing.assert_allclose(
            sinr_all(alloc, two_cells),
            [sinr(alloc, two_cells, two_cells.serving[j], j) for j in range(3)],
            rtol=1e-14,
        )

    def test_rate_formula(self, two_cells):
        alloc = _alloc(two_cells, [0.5, 0.5, 1.0], [2e-13, 1e-13, 4e-13])
        s = sinr(alloc, two_cells, 1, 2)
        assert user_rate(alloc, two_cells, 1, 2) == pytest.approx(B * math.log2(1.0 + s), rel=1e-14)

    def test_zero_load_means_zero_rate(self, two_cells):
        alloc = _alloc(two_cells, [0.0, 1.0, 1.0], [1e-13, 1e-13, 1e-13])
        assert user_rate(alloc, two_cells, 0, 0) == 0.0
        assert user_rates(alloc, two_cells)[0] == 0.0

    def test_wrong_cell_rejected(self, two_cells):
        alloc = _alloc(two_cells, [0.5, 0.5, 1.0], [1e-13, 1e-13, 1e-13])
        with pytest.raises(ValueError):
            sinr(alloc, two_cells, 1, 0)

    def test_rate_grows_with_own_power_and_falls_with_interference(self, two_cells):
        base = _alloc(two_cells, [0.5, 0.5, 1.0], [1e-13, 1e-13, 1e-13])
        louder = _alloc(two_cells, [0.5, 0.5, 1.0], [2e-13, 1e-13, 1e-13])
        noisier = _alloc(two_cells, [0.5, 0.5, 1.0], [1e-13, 1e-13, 5e-13])
        r = user_rate(base, two_cells, 0, 0)
        assert user_rate(louder, two_cells, 0, 0) > r
        assert user_rate(noisier, two_cells, 0, 0) < r

    def test_with_actual_rates(self, two_cells):
        alloc = with_actual_rates(_alloc(two_cells, [0.5, 0.5, 1.0], [1e-13, 1e-13, 1e-13]), two_cells)
        np.testing.assert_allclose(alloc.rates, user_rates(alloc, two_cells))


class TestValidateAllocation:
    def test_zero_allocation_misses_every_demand(self, two_cells):
        report = validate_allocation(Allocation.zeros(two_cells), two_cells)
        assert not report.ok
        assert report.violations("demand") == 3
        assert report.violations("power-cap") == 0
        assert report.violations("load-cap") == 0

    def test_feasible_allocation_passes(self, two_cells):
        alloc = with_actual_rates(_alloc(two_cells, [0.5, 0.5, 1.0], [1e-13, 1e-13, 1e-13]), two_cells)
        report = validate_allocation(alloc, two_cells.with_demands(alloc.rates * 0.999))
        assert report.ok, report.errors
        assert report.worst["demand"] < 0.0

    def test_overload_and_overpower(self, two_cells):
        heavy = 2.0 * two_cells.q_max[1]
        alloc = _alloc(two_cells, [0.7, 0.6, 1.0], [1e-13, 1e-13, heavy])
        report = validate_allocation(alloc, two_cells)
        assert report.violations("load-cap") == 1
        assert report.violations("power-cap") == 1
        assert report.worst["power-cap"] == pytest.approx(1.0)

    def test_recorded_rate_above_achievable(self, two_cells):
        alloc = _alloc(two_cells, [0.5, 0.5, 1.0], [1e-13, 1e-13, 1e-13], rates=[1e12, 0.0, 0.0])
        report = validate_allocation(alloc, two_cells)
        assert report.violations("rate-consistency") == 1

    def test_mismatched_shape(self, two_cells):
        alloc = Allocation(np.array([0, 1]), 2, np.ones(2), np.zeros(2), np.zeros(2))
        report = validate_allocation(alloc, two_cells)
        assert report.violations("shape") == 1
