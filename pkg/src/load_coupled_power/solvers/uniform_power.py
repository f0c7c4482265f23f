"""Uniform-power baseline (OPV-PM).

Every BS transmits one power density p_i to all of its users and operates
at full load; p_i is the density at which the loads

    m_ij = D_ij / (B log2(1 + p_i g_ij / I_j))

sum to one. The outer loop is the same fixed point as the joint scheme.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..kernels import Bracket, bisect_monotone
from ..network.scenario import NetworkScenario
from .fixed_point import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    DIVERGENCE_FACTOR,
    CellUpdate,
    PmResult,
    Schedule,
    run_fixed_point,
)
from .power_min import cell_interference

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

LN2 = math.log(2.0)


def _log_expm1(x: FloatArray) -> FloatArray:
    with np.errstate(over="ignore", divide="ignore"):
        return np.where(x > 30.0, x + np.log1p(-np.exp(-np.minimum(x, 700.0))), np.log(np.expm1(x)))


def _uniform_loads(log_p: float, log_gain: FloatArray, demands: FloatArray, bandwidth: float) -> FloatArray:
    # log2(1 + p g) evaluated as logaddexp to stay finite for large p
    spectral = np.logaddexp(0.0, log_p + log_gain) / LN2
    return demands / (bandwidth * spectral)


def per_cell_opv(i: int, q: ArrayLike, sc: NetworkScenario) -> CellUpdate:
    """Uniform density for cell ``i`` that brings its load to exactly one.

    The density search stops at 1e3 P_max / B; a cell that still needs more
    is returned at that bound with ``saturated`` set.
    """
    users = sc.users_of(i)
    demands = sc.demands[users]
    gain = sc.gains[i, users] / cell_interference(sc, i, q)
    log_gain = np.log(gain)
    rate_ratio = LN2 * demands / sc.bandwidth
    count = len(demands)

    bound = DIVERGENCE_FACTOR * float(sc.q_max[i])
    log_bound = math.log(bound)
    # one user alone at full load / every user at load 1/M
    lo = float(np.max(_log_expm1(rate_ratio) - log_gain))
    hi = float(np.max(_log_expm1(count * rate_ratio) - log_gain))

    if lo >= log_bound:
        saturated, log_p = True, log_bound
    elif count == 1:
        saturated, log_p = False, lo
    else:
        log_p = bisect_monotone(
            lambda s: float(_uniform_loads(s, log_gain, demands, sc.bandwidth).sum()) - 1.0,
            Bracket(lo=lo, hi=max(hi, lo + 1e-12), tolerance=1e-15),
        )
        saturated = log_p > log_bound
        log_p = min(log_p, log_bound)

    p = math.exp(log_p)
    loads = _uniform_loads(log_p, log_gain, demands, sc.bandwidth)
    if not saturated:
        loads = loads / loads.sum()
    return CellUpdate(loads=loads, power=loads * p, multiplier=p, saturated=saturated)


def opv_pm(
    sc: NetworkScenario,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    *,
    schedule: Schedule = "jacobi",
    initial_q: ArrayLike | None = None,
    record_trace: bool = True,
) -> PmResult:
    """Sum-power minimisation restricted to one power density per cell."""
    return run_fixed_point(
        sc,
        per_cell_opv,
        tol=tol,
        max_iter=max_iter,
        schedule=schedule,
        initial_q=initial_q,
        record_trace=record_trace,
        label="opv-pm",
    )
