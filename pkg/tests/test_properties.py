"""Tests for the sampled interference-function, uniqueness and minimality checks."""

import math

import numpy as np
import pytest

from load_coupled_power.oracle import symmetric_two_cell_scenario
from load_coupled_power.solvers.power_min import dtapc_pm
from load_coupled_power.solvers.properties import (
    find_feasibility_edge,
    fixed_point_residual,
    interference_property_check,
    minimality_check,
    uniqueness_check,
)


def test_interference_properties_hold(small_scenario):
    report = interference_property_check(small_scenario, sample_count=200, seed=1)
    assert report.ok, report.errors
    assert report.data["samples"] == 200
    assert report.worst["monotonicity"] <= 1e-10
    assert report.worst["scalability"] < 0.0


def test_interference_properties_hold_on_larger_network(medium_scenario):
    report = interference_property_check(medium_scenario, sample_count=50, seed=2)
    assert report.ok, report.errors


def test_unique_fixed_point_from_every_start(small_scenario):
    report = uniqueness_check(small_scenario, init_count=10, seed=3)
    assert report.ok, report.errors
    assert report.data["spread"] <= 1e-7
    np.testing.assert_allclose(report.data["q_star"], dtapc_pm(small_scenario, tol=1e-11).q, rtol=1e-7)


def test_perturbed_allocations_need_more_power(small_scenario):
    report = minimality_check(small_scenario, sample_count=20, seed=4)
    assert report.ok, report.errors
    assert not report.skipped
    assert report.worst.get("minimality", 0.0) <= 1e-9


def test_minimality_skipped_without_fixed_point():
    # cross gain far above the direct gain: the iteration diverges
    sc = symmetric_two_cell_scenario(1e-10, 2e-9, 1.8e6)
    report = minimality_check(sc)
    assert report.skipped
    assert report.ok
    assert report.warnings


def test_residual_of_a_non_fixed_point(small_scenario):
    assert fixed_point_residual(small_scenario, small_scenario.q_max) > 0.5


def test_feasibility_edge_matches_closed_form():
    g, g_cross, noise, bandwidth, limit = 1e-10, 1e-13, 4e-21, 18e6, 10.0
    sc = symmetric_two_cell_scenario(g, g_cross, 1e6, bandwidth, noise, limit)
    q_max = limit / bandwidth
    # q* = q_max  <=>  c = q_max g / (noise + q_max g_cross)
    c = q_max * g / (noise + q_max * g_cross)
    expected = bandwidth * math.log2(1.0 + c)
    assert find_feasibility_edge(sc) == pytest.approx(expected, rel=3e-3)


def test_feasibility_edge_separates_verdicts(small_scenario):
    edge = find_feasibility_edge(small_scenario)
    assert dtapc_pm(small_scenario.with_uniform_demand(0.99 * edge)).solved
    assert not dtapc_pm(small_scenario.with_uniform_demand(1.01 * edge)).solved
