"""Physical model: SINR, rates, cell powers and constraint checking."""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray

from ..reports import CheckReport
from .scenario import Allocation, NetworkScenario

FloatArray = NDArray[np.float64]

LN2 = math.log(2.0)


def _check_member(sc: NetworkScenario, i: int, j: int) -> None:
    if int(sc.serving[j]) != i:
        raise ValueError(f"user {j} is served by cell {int(sc.serving[j])}, not {i}")


def sinr_all(alloc: Allocation, sc: NetworkScenario) -> FloatArray:
    """Average SINR of every user under ``alloc``.

    Interference from cell k at user j is q_k g_kj: cell k is active toward
    its user l for a fraction m_kl of the time at density p_kl.
    """
    interference = sc.interference_density(alloc.cell_powers().values)
    return alloc.power_density * sc.serving_gains / interference


def sinr(alloc: Allocation, sc: NetworkScenario, i: int, j: int) -> float:
    """SINR of user ``j`` served by cell ``i``."""
    _check_member(sc, i, j)
    q = alloc.cell_powers().others(i)
    interference = float(sc.cross_gains[:, j] @ q) + sc.noise_density
    return float(alloc.power_density[j] * sc.gains[i, j] / interference)


def rate_of(bandwidth: float, loads: FloatArray, sinr_values: FloatArray) -> FloatArray:
    """B m log2(1 + sinr), exactly 0 where m = 0."""
    loads = np.asarray(loads, dtype=float)
    out = np.zeros_like(loads)
    active = loads > 0.0
    out[active] = bandwidth * loads[active] * np.log1p(np.asarray(sinr_values)[active]) / LN2
    return out


def user_rates(alloc: Allocation, sc: NetworkScenario) -> FloatArray:
    return rate_of(sc.bandwidth, alloc.loads, sinr_all(alloc, sc))


def user_rate(alloc: Allocation, sc: NetworkScenario, i: int, j: int) -> float:
    """Achievable rate of user ``j`` in cell ``i`` in bits/s."""
    _check_member(sc, i, j)
    m = float(alloc.loads[j])
    if m == 0.0:
        return 0.0
    return sc.bandwidth * m * math.log1p(sinr(alloc, sc, i, j)) / LN2


def cell_power(alloc: Allocation, i: int) -> float:
    """q_i = sum of cell ``i``'s transformed powers, W/Hz."""
    return float(alloc.transformed_power[alloc.serving == i].sum())


def with_actual_rates(alloc: Allocation, sc: NetworkScenario) -> Allocation:
    """Copy of ``alloc`` whose recorded rates are the achievable rates."""
    return alloc.with_rates(user_rates(alloc, sc))


def validate_allocation(
    alloc: Allocation, sc: NetworkScenario, tol: float = 1e-9
) -> CheckReport:
    """Check an allocation against the joint problem's constraints.

    Checks:
        rate-consistency: recorded rates do not exceed achievable ones.
        power-cap: sum of transformed powers times B within P_max per cell.
        load-cap: per-cell load sum within 1.
        demand: recorded rates at or above demands.

    Power, rate and demand margins are relative; the load margin is absolute.
    ``worst`` stores the largest violation per check (<= 0 means satisfied).
    """
    report = CheckReport(name="constraints")
    if alloc.loads.shape != (sc.user_count,) or alloc.cell_count != sc.cell_count:
        report.error("shape", "allocation does not match the scenario's users and cells")
        return report
    if not np.array_equal(alloc.serving, sc.serving):
        report.error("shape", "allocation association differs from the scenario")
        return report

    achievable = user_rates(alloc, sc)
    scale = np.maximum(np.maximum(np.abs(alloc.rates), achievable), sc.demands)
    rate_excess = (alloc.rates - achievable) / scale
    report.record("rate-consistency", float(rate_excess.max()))
    for j in np.flatnonzero(rate_excess > tol):
        report.error(
            "rate-consistency",
            f"user {j}: recorded rate {alloc.rates[j]:.6g} exceeds achievable {achievable[j]:.6g}",
        )

    cell_watts = alloc.cell_powers().values * sc.bandwidth
    power_excess = (cell_watts - sc.power_limits) / sc.power_limits
    report.record("power-cap", float(power_excess.max()))
    for i in np.flatnonzero(power_excess > tol):
        report.error(
            "power-cap",
            f"cell {i}: power {cell_watts[i]:.6g} W exceeds {sc.power_limits[i]:.6g} W",
        )

    load_excess = alloc.cell_loads() - 1.0
    report.record("load-cap", float(load_excess.max()))
    for i in np.flatnonzero(load_excess > tol):
        report.error("load-cap", f"cell {i}: load sum exceeds 1 by {load_excess[i]:.3e}")

    demand_gap = (sc.demands - alloc.rates) / sc.demands
    report.record("demand", float(demand_gap.max()))
    for j in np.flatnonzero(demand_gap > tol):
        report.error(
            "demand",
            f"user {j}: rate {alloc.rates[j]:.6g} below demand {sc.demands[j]:.6g}",
        )
    return report
