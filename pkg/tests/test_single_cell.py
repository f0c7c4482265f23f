"""Tests for the closed-form single-cell solvers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from load_coupled_power.oracle import grid_oracle_pm_sc, grid_oracle_rm_sc
from load_coupled_power.solvers.single_cell import (
    SingleCellProblem,
    kkt_residuals,
    min_power_of_demands,
    pm_sc,
    rm_sc,
)
from load_coupled_power.solvers.status import RmMode, SolveStatus

NOISE = 4e-21
B = 18e6


def _problem(gains, demands, cap=math.inf):
    return SingleCellProblem(np.asarray(gains, float), np.asarray(demands, float), NOISE, B, cap)


class TestProblem:
    def test_derived_coefficients(self):
        prob = _problem([1e-10], [1.8e6])
        assert prob.a[0] == pytest.approx(4e-11)
        assert prob.b[0] == pytest.approx(0.1 * math.log(2.0))
        assert prob.c[0] == pytest.approx(2.5e10)

    @pytest.mark.parametrize(
        "gains, demands",
        [([], []), ([1e-10, 0.0], [1e6, 1e6]), ([1e-10], [-1.0]), ([1e-10, 1e-10], [1e6])],
    )
    def test_invalid(self, gains, demands):
        with pytest.raises(ValueError):
            _problem(gains, demands)

    def test_from_scenario_uses_cell_cap(self, single_cell_scenario):
        prob = SingleCellProblem.from_scenario(single_cell_scenario)
        assert prob.user_count == 5
        assert prob.power_cap == pytest.approx(10.0 / 18e6)


class TestPowerMin:
    def test_single_user(self):
        prob = _problem([1e-10], [1.8e6])
        sol = pm_sc(prob)
        assert sol.loads[0] == 1.0
        assert sol.sum_power == pytest.approx(4e-11 * (2.0**0.1 - 1.0), rel=1e-14)

    def test_identical_users_share_equally(self):
        sol = pm_sc(_problem([1e-10, 1e-10], [1e6, 1e6]))
        np.testing.assert_allclose(sol.loads, [0.5, 0.5], rtol=1e-12)

    def test_full_load_and_demands_met(self, make_problem):
        rng = np.random.default_rng(0)
        for users in (2, 5, 30):
            prob = make_problem(rng, users)
            sol = pm_sc(prob)
            assert sol.solved
            assert sol.loads.sum() == pytest.approx(1.0, abs=1e-12)
            np.testing.assert_allclose(sol.rates, prob.demands, rtol=1e-9)

    def test_stronger_user_gets_less_power_per_bit(self):
        sol = pm_sc(_problem([1e-9, 1e-11], [1e6, 1e6]))
        assert sol.transformed_power[0] < sol.transformed_power[1]

    def test_matches_grid_oracle(self, make_problem):
        rng = np.random.default_rng(1)
        for k in range(100):
            prob = make_problem(rng, 2 + k % 3)
            sol = pm_sc(prob)
            ref = grid_oracle_pm_sc(prob)
            assert sol.loads.sum() == pytest.approx(1.0, abs=1e-9)
            np.testing.assert_allclose(sol.rates, prob.demands, rtol=1e-9)
            assert sol.sum_power <= ref.objective * (1.0 + 1e-10)
            assert ref.objective - sol.sum_power <= ref.error_bound + 1e-4 * sol.sum_power

    def test_min_power_increases_with_demand(self, make_problem):
        prob = make_problem(np.random.default_rng(2), 3)
        low = min_power_of_demands(prob)
        high = min_power_of_demands(_problem(prob.gains, prob.demands * 1.1))
        assert high > low

    def test_min_power_vanishes_with_demand(self, make_problem):
        prob = make_problem(np.random.default_rng(3), 3)
        tiny = min_power_of_demands(_problem(prob.gains, prob.demands * 1e-6))
        assert tiny < 1e-5 * min_power_of_demands(prob)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(
            st.tuples(st.floats(-13.0, -8.0), st.floats(1e4, 5e6)), min_size=1, max_size=8
        )
    )
    def test_any_instance_is_solved_at_full_load(self, users):
        gains = [10.0**e for e, _ in users]
        demands = [d for _, d in users]
        sol = pm_sc(_problem(gains, demands))
        assert np.all(sol.loads > 0.0)
        assert sol.loads.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(sol.rates, demands, rtol=1e-8)


class TestRateMax:
    def test_requires_finite_cap(self):
        with pytest.raises(ValueError):
            rm_sc(_problem([1e-10], [1e6]))

    def test_single_user_takes_the_whole_cap(self):
        cap = 1e-12
        sol = rm_sc(_problem([1e-10], [1e6], cap))
        assert sol.mode is RmMode.SURPLUS
        assert sol.sum_rate == pytest.approx(B * math.log2(1.0 + 2.5e10 * cap), rel=1e-12)

    def test_cap_at_minimum_power_is_boundary(self, make_problem):
        prob = make_problem(np.random.default_rng(4), 3)
        p_min = min_power_of_demands(prob)
        sol = rm_sc(prob.with_power_cap(p_min))
        assert sol.solved
        assert sol.mode is RmMode.BOUNDARY
        np.testing.assert_allclose(sol.loads, pm_sc(prob).loads)

    def test_cap_below_minimum_power_is_infeasible(self, make_problem):
        prob = make_problem(np.random.default_rng(5), 3)
        p_min = min_power_of_demands(prob)
        sol = rm_sc(prob.with_power_cap(0.5 * p_min))
        assert sol.status is SolveStatus.INFEASIBLE
        assert sol.power_deficit == pytest.approx(0.5 * p_min)

    def test_surplus_structure(self, make_problem):
        rng = np.random.default_rng(6)
        for users in (2, 3, 6):
            prob = make_problem(rng, users)
            prob = prob.with_power_cap(2.0 * min_power_of_demands(prob))
            sol = rm_sc(prob)
            best = int(np.argmax(prob.c))
            others = np.arange(users) != best
            assert sol.mode is RmMode.SURPLUS
            assert sol.loads.sum() == pytest.approx(1.0, abs=1e-12)
            assert sol.sum_power == pytest.approx(prob.power_cap, rel=1e-12)
            np.testing.assert_allclose(sol.rates[others], prob.demands[others], rtol=1e-8)
            assert sol.rates[best] > prob.demands[best]
            assert sol.multipliers["alpha"][best] == 0.0
            assert kkt_residuals(prob, sol).max <= 1e-6

    def test_matches_grid_oracle(self, make_problem):
        rng = np.random.default_rng(7)
        for k in range(100):
            prob = make_problem(rng, 2 + k % 2)
            prob = prob.with_power_cap(2.0 * min_power_of_demands(prob))
            sol = rm_sc(prob)
            ref = grid_oracle_rm_sc(prob)
            assert sol.loads.sum() == pytest.approx(1.0, abs=1e-9)
            assert sol.sum_power == pytest.approx(prob.power_cap, rel=1e-9)
            assert kkt_residuals(prob, sol).max <= 1e-6
            assert sol.sum_rate >= ref.objective * (1.0 - 1e-9)
            assert (sol.sum_rate - ref.objective) / ref.objective <= 1e-3

    def test_more_power_more_rate(self, make_problem):
        prob = make_problem(np.random.default_rng(8), 4)
        p_min = min_power_of_demands(prob)
        assert rm_sc(prob.with_power_cap(3.0 * p_min)).sum_rate > rm_sc(
            prob.with_power_cap(2.0 * p_min)
        ).sum_rate

    def test_tied_gains_are_perturbed(self):
        prob = _problem([1e-10, 1e-10, 1e-11], [1e6, 1e6, 1e6])
        prob = prob.with_power_cap(2.0 * min_power_of_demands(prob))
        sol = rm_sc(prob)
        assert sol.solved
        assert 0.0 < sol.tie_perturbation <= 1e-11
        assert sol.sum_power == pytest.approx(prob.power_cap, rel=1e-12)

    def test_kkt_residuals_need_surplus_mode(self, make_problem):
        prob = make_problem(np.random.default_rng(9), 2)
        sol = pm_sc(prob)
        with pytest.raises(ValueError):
            kkt_residuals(prob, sol)
