"""Tests for the YAML dump format of scenarios and allocations."""

import numpy as np
import pytest

from load_coupled_power.errors import ScenarioError
from load_coupled_power.network.io import (
    dump_allocation,
    dump_scenario,
    load_allocation,
    load_scenario,
)
from load_coupled_power.solvers.power_min import dtapc_pm


def test_scenario_reloads_bit_for_bit(small_scenario, tmp_path):
    path = dump_scenario(small_scenario, tmp_path / "scenario.yaml")
    loaded = load_scenario(path)
    np.testing.assert_array_equal(loaded.gains, small_scenario.gains)
    np.testing.assert_array_equal(loaded.serving, small_scenario.serving)
    np.testing.assert_array_equal(loaded.demands, small_scenario.demands)
    np.testing.assert_array_equal(loaded.power_limits, small_scenario.power_limits)
    assert loaded.noise_density == small_scenario.noise_density
    assert loaded.bandwidth == small_scenario.bandwidth


def test_reloaded_scenario_solves_identically(small_scenario, tmp_path):
    loaded = load_scenario(dump_scenario(small_scenario, tmp_path / "s.yaml"))
    np.testing.assert_array_equal(dtapc_pm(loaded).q, dtapc_pm(small_scenario).q)


def test_header_states_units(small_scenario, tmp_path):
    text = dump_scenario(small_scenario, tmp_path / "s.yaml").read_text()
    assert text.startswith("# load-coupled-power scenario")
    assert "W/Hz" in text
    assert "bit/s" in text


def test_allocation_reloads(small_scenario, tmp_path):
    alloc = dtapc_pm(small_scenario).allocation
    loaded = load_allocation(dump_allocation(alloc, tmp_path / "a.yaml"))
    np.testing.assert_array_equal(loaded.loads, alloc.loads)
    np.testing.assert_array_equal(loaded.transformed_power, alloc.transformed_power)
    np.testing.assert_array_equal(loaded.rates, alloc.rates)
    assert loaded.cell_count == alloc.cell_count


def test_malformed_yaml_reports_line(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("kind: scenario\nversion: 1\ngains: [1.0, 2.0\n")
    with pytest.raises(ScenarioError, match="malformed YAML at line"):
        load_scenario(path)


def test_wrong_document_kind(small_scenario, tmp_path):
    path = dump_scenario(small_scenario, tmp_path / "s.yaml")
    with pytest.raises(ScenarioError, match="kind"):
        load_allocation(path)


def test_negative_gain_in_file_rejected(small_scenario, tmp_path):
    path = dump_scenario(small_scenario, tmp_path / "s.yaml")
    text = path.read_text()
    first = repr(float(small_scenario.gains[0, 0]))
    path.write_text(text.replace(first, "-" + first, 1))
    with pytest.raises(ScenarioError, match="gains"):
        load_scenario(path)


def test_missing_field(tmp_path):
    path = tmp_path / "s.yaml"
    path.write_text("kind: scenario\nversion: 1\nbandwidth: 1.0\n")
    with pytest.raises(ScenarioError, match="misses field"):
        load_scenario(path)
