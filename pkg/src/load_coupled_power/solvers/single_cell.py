"""Closed-form single-cell solvers.

Both problems are convex in the loads m and transformed powers p-bar = m p,
and both are solved at full load (sum of m = 1).

Power minimisation: with a_j = sigma^2 / g_j and b_j = ln2 D_j / B the
optimum has m_j = b_j / u^-1(lambda / a_j) and p-bar_j = a_j m_j (e^(b_j/m_j) - 1);
the multiplier lambda is the unique root of sum_j m_j(lambda) = 1.

Rate maximisation: the best-gain user absorbs all surplus power; every
other user is held at exactly its demand. The solution is parameterised
by the best user's 1 + SINR, x1, and every other user's 1 + SINR follows
from w(y_j) = (c_j / c_1) w(x1) with c = g / sigma^2. x1 is found by
bisection on the total power.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..kernels import Bracket, bisect_monotone, log_u_eval, u_eval, u_inv_log, w_eval, w_inv
from ..network.scenario import NetworkScenario
from .status import RmMode, SolveStatus

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

LN2 = math.log(2.0)
BOUNDARY_RTOL = 1e-9
TIE_PERTURBATION = 1e-12
_MAX_LOG_SINR = 700.0


@dataclass(frozen=True, eq=False)
class SingleCellProblem:
    """One cell's users, their channel and demands.

    Attributes:
        gains: Linear gains g_j of the M users.
        demands: Rate demands D_j in bits/s.
        noise_density: sigma^2 in W/Hz (1.0 when gains are effective gains).
        bandwidth: B in Hz.
        power_cap: Cap on the sum of transformed powers in W/Hz; only the
            rate-maximisation solver uses it.
    """

    gains: FloatArray
    demands: FloatArray
    noise_density: float
    bandwidth: float
    power_cap: float = math.inf

    def __post_init__(self) -> None:
        gains = np.atleast_1d(np.asarray(self.gains, dtype=float)).copy()
        demands = np.atleast_1d(np.asarray(self.demands, dtype=float)).copy()
        if gains.ndim != 1 or gains.shape != demands.shape or gains.size == 0:
            raise ValueError("gains and demands must be non-empty 1-D arrays of equal length")
        if not np.all(np.isfinite(gains)) or np.any(gains <= 0.0):
            raise ValueError("gains must be finite and > 0")
        if not np.all(np.isfinite(demands)) or np.any(demands <= 0.0):
            raise ValueError("demands must be finite and > 0")
        if not (self.noise_density > 0.0 and self.bandwidth > 0.0):
            raise ValueError("noise_density and bandwidth must be > 0")
        if not self.power_cap > 0.0:
            raise ValueError("power_cap must be > 0")
        gains.setflags(write=False)
        demands.setflags(write=False)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "demands", demands)
        object.__setattr__(self, "noise_density", float(self.noise_density))
        object.__setattr__(self, "bandwidth", float(self.bandwidth))
        object.__setattr__(self, "power_cap", float(self.power_cap))

    @classmethod
    def from_effective_gains(
        cls,
        effective_gains: ArrayLike,
        demands: ArrayLike,
        bandwidth: float,
        power_cap: float = math.inf,
    ) -> SingleCellProblem:
        """Problem whose gains already include interference-plus-noise (a_j = 1/g_j)."""
        return cls(np.asarray(effective_gains, float), np.asarray(demands, float), 1.0, bandwidth, power_cap)

    @classmethod
    def from_scenario(cls, sc: NetworkScenario, i: int = 0) -> SingleCellProblem:
        """Cell ``i`` of a scenario with its foreign cells silent."""
        users = sc.users_of(i)
        return cls(
            sc.gains[i, users], sc.demands[users], sc.noise_density, sc.bandwidth, float(sc.q_max[i])
        )

    @property
    def user_count(self) -> int:
        return int(self.gains.shape[0])

    @property
    def a(self) -> FloatArray:
        return self.noise_density / self.gains

    @property
    def b(self) -> FloatArray:
        return LN2 * self.demands / self.bandwidth

    @property
    def c(self) -> FloatArray:
        """Effective gain g / sigma^2."""
        return self.gains / self.noise_density

    def with_power_cap(self, power_cap: float) -> SingleCellProblem:
        return SingleCellProblem(self.gains, self.demands, self.noise_density, self.bandwidth, power_cap)


@dataclass(frozen=True, eq=False)
class SingleCellSolution:
    """Loads, transformed powers and rates of one cell, in problem order.

    ``multipliers`` holds ``lambda`` for power minimisation, and ``gamma``,
    ``beta``, ``alpha`` (per user) for rate maximisation.
    """

    status: SolveStatus
    loads: FloatArray
    transformed_power: FloatArray
    rates: FloatArray
    multipliers: dict[str, Any] = field(default_factory=dict)
    mode: RmMode | None = None
    min_power: float = math.nan
    power_deficit: float = 0.0
    tie_perturbation: float = 0.0

    @property
    def solved(self) -> bool:
        return self.status is SolveStatus.SOLVED

    @property
    def sum_power(self) -> float:
        return float(self.transformed_power.sum())

    @property
    def sum_rate(self) -> float:
        return float(self.rates.sum())


def achieved_rates(prob: SingleCellProblem, loads: FloatArray, power: FloatArray) -> FloatArray:
    """B m log2(1 + c p-bar / m), 0 where m = 0."""
    out = np.zeros_like(loads)
    active = loads > 0.0
    sinr = prob.c[active] * power[active] / loads[active]
    out[active] = prob.bandwidth * loads[active] * np.log1p(sinr) / LN2
    return out


# ---------------------------------------------------------------------------
# Sum-power minimisation
# ---------------------------------------------------------------------------


def _pm_loads(log_lambda: float, log_a: FloatArray, b: FloatArray) -> FloatArray:
    with np.errstate(divide="ignore"):
        return b / np.asarray(u_inv_log(log_lambda - log_a))


def pm_sc(prob: SingleCellProblem) -> SingleCellSolution:
    """Minimum sum power meeting every demand at full load.

    Always solvable; the power cap is ignored.
    """
    a, b = prob.a, prob.b
    if prob.user_count == 1:
        loads = np.ones(1)
        power = a * np.expm1(b)
        lam = float(a[0] * u_eval(float(b[0])))
    else:
        log_a = np.log(a)
        # lambda / a_j = u(b_j) gives m_j = 1 (sum >= 1); u(M b_j) gives m_j = 1/M.
        lo = float(np.max(log_a + np.asarray(log_u_eval(b))))
        hi = float(np.max(log_a + np.asarray(log_u_eval(prob.user_count * b))))
        if not lo < hi:
            hi = lo + 1.0
        log_lambda = bisect_monotone(
            lambda s: float(_pm_loads(s, log_a, b).sum()) - 1.0,
            Bracket(lo=lo, hi=hi, tolerance=1e-15),
        )
        loads = _pm_loads(log_lambda, log_a, b)
        # Rescaling keeps every rate exactly at demand since p-bar follows m.
        loads = loads / loads.sum()
        power = a * loads * np.expm1(b / loads)
        lam = math.exp(log_lambda)

    rates = achieved_rates(prob, loads, power)
    logger.debug("pm_sc: M=%d sum power %.6e W/Hz", prob.user_count, power.sum())
    return SingleCellSolution(
        status=SolveStatus.SOLVED,
        loads=loads,
        transformed_power=power,
        rates=rates,
        multipliers={"lambda": lam},
        min_power=float(power.sum()),
    )


def min_power_of_demands(prob: SingleCellProblem) -> float:
    """P_min(D): the sum power of :func:`pm_sc`, in W/Hz."""
    return pm_sc(prob).sum_power


# ---------------------------------------------------------------------------
# Sum-rate maximisation
# ---------------------------------------------------------------------------


def _break_ties(c_sorted: FloatArray) -> tuple[FloatArray, float]:
    """Shrink repeated gains so the sorted sequence is strictly decreasing."""
    out = np.array(c_sorted, copy=True)
    perturbation = 0.0
    run = 0
    for k in range(1, len(out)):
        if c_sorted[k] == c_sorted[k - 1]:
            run += 1
            out[k] = c_sorted[k] * (1.0 - run * TIE_PERTURBATION)
            perturbation = max(perturbation, run * TIE_PERTURBATION)
        else:
            run = 0
    return out, perturbation


@dataclass(frozen=True)
class _RmPoint:
    x1: float
    y: FloatArray  # 1 + SINR of users 2..M (sorted order)
    loads: FloatArray
    power: FloatArray
    valid: bool


def _rm_point(t: float, c: FloatArray, b: FloatArray) -> _RmPoint:
    """Loads and powers for log(1 + SINR_1) = t, users sorted by gain."""
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        x1 = math.exp(t)
        w1 = float(w_eval(x1)) if math.isfinite(x1) else math.inf
        targets = (c[1:] / c[0]) * w1
        if not np.all(np.isfinite(targets)):
            empty = np.full(len(c), math.nan)
            return _RmPoint(x1, empty[1:], empty, empty, valid=False)
        y = np.atleast_1d(np.asarray(w_inv(targets)))
        m_rest = b[1:] / np.log(y)
        p_rest = m_rest * (y - 1.0) / c[1:]
    m1 = 1.0 - float(m_rest.sum())
    valid = bool(np.all(np.isfinite(m_rest)) and m1 > 0.0)
    loads = np.concatenate(([m1], m_rest))
    power = np.concatenate(([m1 * (x1 - 1.0) / c[0] if valid else math.nan], p_rest))
    return _RmPoint(x1, y, loads, power, valid)


def _rm_excess(t: float, c: FloatArray, b: FloatArray, cap: float) -> float:
    """Total power minus the cap; increasing in t."""
    if t >= _MAX_LOG_SINR:
        return cap
    point = _rm_point(t, c, b)
    if not point.valid:
        # every load went to users 2..M: below the feasible range of t
        return -cap
    total = float(point.power.sum())
    if not math.isfinite(total):
        return cap
    return total - cap


def rm_sc(prob: SingleCellProblem) -> SingleCellSolution:
    """Maximum sum rate under the power cap with every demand met.

    Returns the power-minimisation point (mode BOUNDARY) when the cap equals
    the minimum power, and an INFEASIBLE result carrying the power deficit
    when the cap is below it.
    """
    cap = prob.power_cap
    if not math.isfinite(cap):
        raise ValueError("rm_sc requires a finite power cap")

    pm = pm_sc(prob)
    p_min = pm.sum_power
    if p_min > cap * (1.0 + BOUNDARY_RTOL):
        logger.warning("rm_sc: demands need %.6e W/Hz, cap is %.6e W/Hz", p_min, cap)
        return SingleCellSolution(
            status=SolveStatus.INFEASIBLE,
            loads=pm.loads,
            transformed_power=pm.transformed_power,
            rates=pm.rates,
            multipliers=pm.multipliers,
            min_power=p_min,
            power_deficit=p_min - cap,
        )
    if abs(p_min - cap) <= BOUNDARY_RTOL * cap:
        return SingleCellSolution(
            status=SolveStatus.SOLVED,
            loads=pm.loads,
            transformed_power=pm.transformed_power,
            rates=pm.rates,
            multipliers=pm.multipliers,
            mode=RmMode.BOUNDARY,
            min_power=p_min,
        )

    c_all, b_all = prob.c, prob.b
    if prob.user_count == 1:
        x1 = 1.0 + c_all[0] * cap
        loads = np.ones(1)
        power = np.array([cap])
        alpha = np.zeros(1)
        perturbation = 0.0
    else:
        order = np.argsort(-c_all, kind="stable")
        c, perturbation = _break_ties(c_all[order])
        b = b_all[order]
        t = bisect_monotone(
            lambda s: _rm_excess(s, c, b, cap),
            Bracket(lo=0.0, hi=1.0, lower_limit=0.0, upper_limit=_MAX_LOG_SINR, tolerance=1e-14),
        )
        point = _rm_point(t, c, b)
        if not point.valid:
            # the root sits on the edge of the valid range; step just inside it
            t = math.nextafter(t, math.inf)
            point = _rm_point(t, c, b)
        x1 = point.x1
        sorted_power = point.power.copy()
        sorted_power[0] = cap - float(sorted_power[1:].sum())
        alpha_sorted = np.concatenate(([0.0], (c[0] / c[1:]) * (point.y / x1) - 1.0))

        loads = np.empty_like(point.loads)
        power = np.empty_like(sorted_power)
        alpha = np.empty_like(alpha_sorted)
        loads[order], power[order], alpha[order] = point.loads, sorted_power, alpha_sorted

    B = prob.bandwidth
    c1 = float(np.max(c_all))
    multipliers = {
        "gamma": B * c1 / (LN2 * x1),
        "beta": B / LN2 * float(w_eval(x1)) / x1,
        "alpha": alpha,
    }
    rates = achieved_rates(prob, loads, power)
    if np.any(rates < prob.demands * (1.0 - 1e-6)):
        logger.warning("rm_sc: surplus solution misses a demand; rates %s", rates)
    logger.debug("rm_sc: M=%d sum rate %.6e bit/s", prob.user_count, rates.sum())
    return SingleCellSolution(
        status=SolveStatus.SOLVED,
        loads=loads,
        transformed_power=power,
        rates=rates,
        multipliers=multipliers,
        mode=RmMode.SURPLUS,
        min_power=p_min,
        tie_perturbation=perturbation,
    )


@dataclass(frozen=True)
class KktResiduals:
    """Relative stationarity residuals of the rate-maximisation Lagrangian."""

    load: FloatArray
    power: FloatArray

    @property
    def max(self) -> float:
        return float(max(np.abs(self.load).max(), np.abs(self.power).max()))


def kkt_residuals(prob: SingleCellProblem, solution: SingleCellSolution) -> KktResiduals:
    """Stationarity in m and p-bar at a surplus-mode rate-max solution.

        dL/dm_j = beta  - B (1 + alpha_j) / ln2 * (ln(1 + s_j) - s_j / (1 + s_j))
        dL/dp_j = gamma - B c_j (1 + alpha_j) m_j / (ln2 (m_j + c_j p_j))

    with s_j = c_j p_j / m_j; both are divided by the multiplier they hold.
    """
    if solution.mode is not RmMode.SURPLUS:
        raise ValueError("KKT residuals are defined for surplus-mode rate-max solutions")
    beta = float(solution.multipliers["beta"])
    gamma = float(solution.multipliers["gamma"])
    alpha = np.asarray(solution.multipliers["alpha"], dtype=float)
    m, p, c = solution.loads, solution.transformed_power, prob.c
    B = prob.bandwidth
    s = c * p / m
    load = (beta - B * (1.0 + alpha) / LN2 * (np.log1p(s) - s / (1.0 + s))) / beta
    power = (gamma - B * c * (1.0 + alpha) * m / (LN2 * (m + c * p))) / gamma
    return KktResiduals(load=load, power=power)
