"""Brute-force and analytic reference solutions for tiny instances.

These do not share code with the closed-form solvers beyond the problem
definition: the grid oracles scan the full-load face of the load simplex
and evaluate the objective directly.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .network.scenario import NetworkScenario
from .solvers.single_cell import LN2, SingleCellProblem

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

DEFAULT_RESOLUTION = 200
_MAX_GRID_POINTS = 250_000


@dataclass(frozen=True)
class OracleResult:
    """Best grid point and a bound on its distance from the true optimum.

    Attributes:
        objective: Sum power (W/Hz) or sum rate (bit/s) at the best point.
        loads: Loads at the best point.
        power: Transformed powers at the best point.
        error_bound: |objective - optimum| estimate from the gradient and
            the final grid spacing.
    """

    objective: float
    loads: FloatArray
    power: FloatArray
    error_bound: float


def _resolution(free_dims: int, requested: int | None) -> int:
    if requested is not None:
        return requested
    if free_dims <= 2:
        return DEFAULT_RESOLUTION
    return int(_MAX_GRID_POINTS ** (1.0 / free_dims))


def _simplex_grid(free_dims: int, n: int) -> FloatArray:
    """Interior points of {m_free > 0, sum(m_free) < 1} spaced 1/n apart."""
    axis = np.arange(1, n) / n
    mesh = np.meshgrid(*([axis] * free_dims), indexing="ij")
    points = np.column_stack([m.ravel() for m in mesh])
    return points[points.sum(axis=1) < 1.0 - 0.5 / n]


def _box_grid(center: FloatArray, half_width: float, n: int) -> FloatArray:
    axes = [np.linspace(c - half_width, c + half_width, n) for c in center]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.column_stack([m.ravel() for m in mesh])
    keep = np.all(points > 0.0, axis=1) & (points.sum(axis=1) < 1.0)
    return points[keep]


def _full_loads(free: FloatArray) -> FloatArray:
    return np.column_stack((free, 1.0 - free.sum(axis=1)))


def _scan(
    evaluate: Callable[[FloatArray], FloatArray],
    free_dims: int,
    n: int,
    zoom: bool,
    maximise: bool,
) -> tuple[FloatArray, float]:
    """Best free-coordinate point over the simplex, then over a zoomed box."""
    sign = -1.0 if maximise else 1.0
    points = _simplex_grid(free_dims, n)
    values = sign * evaluate(_full_loads(points))
    best = int(np.nanargmin(values))
    incumbent, spacing = points[best], 1.0 / n
    if zoom:
        half = 2.0 * spacing
        local = _box_grid(incumbent, half, n)
        if len(local):
            local_values = sign * evaluate(_full_loads(local))
            k = int(np.nanargmin(local_values))
            if local_values[k] <= values[best]:
                incumbent = local[k]
            spacing = 2.0 * half / (n - 1)
    return incumbent, spacing


def _gradient_bound(
    evaluate: Callable[[FloatArray], FloatArray], incumbent: FloatArray, spacing: float
) -> float:
    d = len(incumbent)
    step = 0.25 * spacing
    grad = np.zeros(d)
    for k in range(d):
        up, down = incumbent.copy(), incumbent.copy()
        up[k] += step
        down[k] -= step
        pair = evaluate(_full_loads(np.vstack((up, down))))
        grad[k] = (pair[0] - pair[1]) / (2.0 * step)
    if not np.all(np.isfinite(grad)):
        return math.inf
    return float(np.linalg.norm(grad) * spacing * math.sqrt(d))


def _pm_objective(prob: SingleCellProblem) -> Callable[[FloatArray], FloatArray]:
    a, b = prob.a, prob.b

    def evaluate(loads: FloatArray) -> FloatArray:
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            return (a * loads * np.expm1(b / loads)).sum(axis=1)

    return evaluate


def grid_oracle_pm_sc(
    prob: SingleCellProblem, grid_resolution: int | None = None, zoom: bool = True
) -> OracleResult:
    """Minimum sum power by grid search over loads on sum(m) = 1.

    The power objective decreases in every load, so its minimum lies on
    the full-load face; powers follow from meeting each demand exactly.
    """
    m_count = prob.user_count
    if m_count > 4:
        raise ValueError("grid oracle supports at most 4 users")
    a, b = prob.a, prob.b
    if m_count == 1:
        power = a * np.expm1(b)
        return OracleResult(float(power.sum()), np.ones(1), power, 0.0)

    evaluate = _pm_objective(prob)
    n = _resolution(m_count - 1, grid_resolution)
    incumbent, spacing = _scan(evaluate, m_count - 1, n, zoom, maximise=False)
    loads = _full_loads(incumbent[None, :])[0]
    power = a * loads * np.expm1(b / loads)
    return OracleResult(
        objective=float(power.sum()),
        loads=loads,
        power=power,
        error_bound=_gradient_bound(evaluate, incumbent, spacing),
    )


def _rm_objective(
    prob: SingleCellProblem, surplus: int, rate_slack: float
) -> Callable[[FloatArray], FloatArray]:
    """Sum rate with every user but ``surplus`` exactly at demand."""
    a, b, c = prob.a, prob.b, prob.c
    others = np.arange(prob.user_count) != surplus
    cap, B = prob.power_cap, prob.bandwidth

    def evaluate(loads: FloatArray) -> FloatArray:
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            held = a[others] * loads[:, others] * np.expm1(b[others] / loads[:, others])
            left = cap - held.sum(axis=1)
            m_s = loads[:, surplus]
            rate_s = B * m_s * np.log1p(c[surplus] * left / m_s) / LN2
        ok = (left >= 0.0) & (rate_s >= prob.demands[surplus] * (1.0 - rate_slack))
        total = prob.demands[others].sum() + rate_s
        return np.where(ok, total, -np.inf)

    return evaluate


def grid_oracle_rm_sc(
    prob: SingleCellProblem,
    grid_resolution: int | None = None,
    zoom: bool = True,
    rate_slack: float = 0.0,
) -> OracleResult:
    """Maximum sum rate by grid search over loads on sum(m) = 1.

    Every user except one candidate surplus user gets the power that meets
    its demand exactly; the surplus user takes the remaining power. Each
    user is tried as the surplus user. ``rate_slack`` relaxes the surplus
    user's demand (relative) for instances at the feasibility boundary.
    """
    m_count = prob.user_count
    if m_count > 3:
        raise ValueError("grid oracle supports at most 3 users")
    if not math.isfinite(prob.power_cap):
        raise ValueError("rate-max oracle needs a finite power cap")
    if m_count == 1:
        power = np.array([prob.power_cap])
        rate = prob.bandwidth * math.log1p(float(prob.c[0]) * prob.power_cap) / LN2
        return OracleResult(rate, np.ones(1), power, 0.0)

    n = _resolution(m_count - 1, grid_resolution)
    best: OracleResult | None = None
    a, b = prob.a, prob.b
    for surplus in range(m_count):
        evaluate = _rm_objective(prob, surplus, rate_slack)
        incumbent, spacing = _scan(evaluate, m_count - 1, n, zoom, maximise=True)
        loads = _full_loads(incumbent[None, :])[0]
        value = float(evaluate(loads[None, :])[0])
        if not math.isfinite(value):
            continue
        power = a * loads * np.expm1(b / loads)
        others = np.arange(m_count) != surplus
        power[surplus] = prob.power_cap - power[others].sum()
        if best is None or value > best.objective:
            best = OracleResult(value, loads, power, _gradient_bound(evaluate, incumbent, spacing))
    if best is None:
        raise ValueError("no grid point meets the demands under the power cap")
    return best


def analytic_2cell_fixed_point(
    g_direct: float, g_cross: float, demand: float, bandwidth: float, noise_density: float
) -> float | None:
    """Cell power of the symmetric two-cell, one-user-per-cell fixed point.

    Solves q = (q g_cross + sigma^2) c / g_direct with c = 2^(D/B) - 1;
    None when g_direct <= g_cross c (no nonnegative solution).
    """
    c = math.expm1(LN2 * demand / bandwidth)
    denominator = g_direct - g_cross * c
    if denominator <= 0.0:
        return None
    return noise_density * c / denominator


def symmetric_two_cell_scenario(
    g_direct: float,
    g_cross: float,
    demand: float,
    bandwidth: float = 18e6,
    noise_density: float = 4e-21,
    power_limit_w: float = 10.0,
) -> NetworkScenario:
    """Two cells, one user each, gain g_direct to the own BS and g_cross across."""
    return NetworkScenario(
        gains=np.array([[g_direct, g_cross], [g_cross, g_direct]]),
        serving=np.array([0, 1]),
        demands=np.array([demand, demand]),
        power_limits=np.array([power_limit_w, power_limit_w]),
        noise_density=noise_density,
        bandwidth=bandwidth,
    )
