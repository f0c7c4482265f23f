"""Distributed joint time allocation and power control for sum-power minimisation.

Each cell solves its single-cell power-minimisation problem against the
interference density implied by the other cells' current powers; the
outer loop iterates the resulting map to its fixed point.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..network.scenario import NetworkScenario
from .fixed_point import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    CellUpdate,
    PmResult,
    Schedule,
    run_fixed_point,
)
from .single_cell import SingleCellProblem, pm_sc

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


def cell_interference(sc: NetworkScenario, i: int, q: ArrayLike) -> FloatArray:
    """Interference-plus-noise density at cell ``i``'s users; q_i is ignored."""
    users = sc.users_of(i)
    return sc.cross_gains[:, users].T @ np.asarray(q, dtype=float) + sc.noise_density


def per_cell_pm(i: int, q: ArrayLike, sc: NetworkScenario) -> CellUpdate:
    """Cell ``i``'s minimum-power loads and powers given the others' powers.

    ``q`` is the full cell power vector; its own entry is not read. The sum
    of the returned powers is v_i(q).
    """
    users = sc.users_of(i)
    effective = sc.gains[i, users] / cell_interference(sc, i, q)
    sol = pm_sc(SingleCellProblem.from_effective_gains(effective, sc.demands[users], sc.bandwidth))
    return CellUpdate(
        loads=sol.loads,
        power=sol.transformed_power,
        multiplier=float(sol.multipliers["lambda"]),
    )


def interference_map(sc: NetworkScenario, q: ArrayLike) -> FloatArray:
    """v(q): every cell's minimum power density against powers ``q``."""
    q = np.asarray(q, dtype=float)
    return np.array([per_cell_pm(i, q, sc).q for i in range(sc.cell_count)])


def dtapc_pm(
    sc: NetworkScenario,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    *,
    schedule: Schedule = "jacobi",
    initial_q: ArrayLike | None = None,
    record_trace: bool = True,
) -> PmResult:
    """Minimise the sum of cell powers subject to every user's demand.

    Feasible exactly when the fixed point exists and lies under the caps;
    on success every recorded rate equals its demand.
    """
    return run_fixed_point(
        sc,
        per_cell_pm,
        tol=tol,
        max_iter=max_iter,
        schedule=schedule,
        initial_q=initial_q,
        record_trace=record_trace,
        label="dtapc-pm",
    )
