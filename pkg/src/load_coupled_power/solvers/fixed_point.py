"""Outer fixed-point loop over cell powers.

Both the joint time/power minimiser and the uniform-power baseline iterate
q <- v(q), where v_i is the minimum power density cell i needs to meet its
demands against the interference implied by the other cells' powers.
Only the per-cell update differs, so the loop, the stopping rule and the
infeasibility verdicts live here.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..network.scenario import Allocation, NetworkScenario
from .status import SolveStatus

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

Schedule = Literal["jacobi", "gauss-seidel"]

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000
DIVERGENCE_FACTOR = 1e3
CAP_RTOL = 1e-9
# relative step below which successive differences are rounding noise
ROUNDING_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class CellUpdate:
    """Result of one cell's update against a snapshot of the other cells.

    Attributes:
        loads: Loads of the cell's users.
        power: Transformed powers of the cell's users (W/Hz).
        multiplier: lambda_i for the joint update, the uniform density p_i
            for the baseline.
        saturated: The update hit its search bound before meeting the demands.
    """

    loads: FloatArray
    power: FloatArray
    multiplier: float
    saturated: bool = False

    @property
    def q(self) -> float:
        return float(self.power.sum())


CellUpdateFn = Callable[[int, FloatArray, NetworkScenario], CellUpdate]


@dataclass(frozen=True, eq=False)
class PmIterate:
    """One row of the convergence trace."""

    iteration: int
    q: FloatArray
    residual: float
    multipliers: FloatArray


@dataclass(eq=False)
class PmResult:
    """Outcome of a fixed-point run.

    ``allocation`` is present whenever the loop converged, including
    cap-infeasible runs, so diagnostics can still be written.
    """

    status: SolveStatus
    q: FloatArray
    iterations: int
    converged: bool
    allocation: Allocation | None = None
    multipliers: FloatArray = field(default_factory=lambda: np.zeros(0))
    reason: str | None = None
    offending_cells: list[int] = field(default_factory=list)
    excess: FloatArray = field(default_factory=lambda: np.zeros(0))
    trace: list[PmIterate] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status is SolveStatus.SOLVED

    @property
    def sum_power_density(self) -> float:
        return float(self.q.sum())

    def sum_power_watts(self, bandwidth: float) -> float:
        return self.sum_power_density * bandwidth


def _sweep(
    sc: NetworkScenario,
    update: CellUpdateFn,
    q: FloatArray,
    schedule: Schedule,
) -> tuple[FloatArray, list[CellUpdate]]:
    snapshot = q.copy()
    fresh = q.copy()
    updates: list[CellUpdate] = []
    for i in range(sc.cell_count):
        seen = snapshot if schedule == "jacobi" else fresh
        upd = update(i, seen, sc)
        fresh[i] = upd.q
        updates.append(upd)
    return fresh, updates


def _assemble(sc: NetworkScenario, updates: list[CellUpdate]) -> Allocation:
    loads = np.concatenate([u.loads for u in updates])
    power = np.concatenate([u.power for u in updates])
    return Allocation(sc.serving, sc.cell_count, loads, power, np.array(sc.demands, copy=True))


def _converged(step: float, prev_step: float | None, scale: float, tol: float) -> bool:
    """Stop when the predicted distance to the fixed point is within ``tol``.

    The contraction ratio is estimated from two successive steps; the
    remaining error of a contraction is at most step * rho / (1 - rho).
    Steps at rounding level count as converged whatever the estimate says.
    """
    if step <= ROUNDING_FLOOR * scale:
        return True
    if prev_step is None or prev_step <= 0.0:
        return False
    rho = step / prev_step
    if rho >= 1.0:
        return False
    return step * rho / (1.0 - rho) <= tol * scale


def run_fixed_point(
    sc: NetworkScenario,
    update: CellUpdateFn,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    schedule: Schedule = "jacobi",
    initial_q: ArrayLike | None = None,
    record_trace: bool = True,
    label: str = "fixed-point",
) -> PmResult:
    """Iterate q <- v(q) until q is within ``tol`` (relative l-inf) of the fixed point.

    The distance is bounded from the step size and the observed contraction
    ratio, so a slowly contracting map is not stopped early just because its
    steps are small. The allocation is rebuilt from one update pass at the
    converged q. Starts from q = P_max / B unless ``initial_q`` is given.
    Verdicts:

        diverged          some q_i exceeded 1e3 P_max_i / B
        demand-stressed   a cell update hit its search bound
        max-iter          no convergence within ``max_iter`` sweeps
        power-cap         converged, but q* exceeds the cap in some cells
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be > 0 and max_iter >= 1")
    if schedule not in ("jacobi", "gauss-seidel"):
        raise ValueError(f"unknown schedule {schedule!r}")
    q_max = sc.q_max
    q = q_max.copy() if initial_q is None else np.array(initial_q, dtype=float)
    if q.shape != (sc.cell_count,) or np.any(~(q >= 0.0)):
        raise ValueError("initial_q must be a nonnegative vector with one entry per cell")

    trace: list[PmIterate] = []
    if record_trace:
        trace.append(PmIterate(0, q.copy(), float("nan"), np.full(sc.cell_count, np.nan)))

    def _infeasible(reason: str, n: int, cells: list[int], converged: bool = False) -> PmResult:
        logger.warning("%s: infeasible (%s) after %d iterations, cells %s", label, reason, n, cells)
        return PmResult(
            status=SolveStatus.INFEASIBLE,
            q=q,
            iterations=n,
            converged=converged,
            multipliers=multipliers,
            reason=reason,
            offending_cells=cells,
            excess=np.maximum(q - q_max, 0.0),
            trace=trace,
        )

    multipliers = np.full(sc.cell_count, np.nan)
    prev_step: float | None = None
    for n in range(1, max_iter + 1):
        q_new, updates = _sweep(sc, update, q, schedule)
        step = float(np.max(np.abs(q_new - q)))
        scale = max(float(np.max(np.abs(q_new))), 1e-300)
        residual = step / scale
        q = q_new
        multipliers = np.array([u.multiplier for u in updates])
        if record_trace:
            trace.append(PmIterate(n, q.copy(), residual, multipliers))
        logger.debug("%s: iteration %d residual %.3e", label, n, residual)

        stressed = [i for i, u in enumerate(updates) if u.saturated]
        if stressed:
            return _infeasible("demand-stressed", n, stressed)
        blown = np.flatnonzero(q > DIVERGENCE_FACTOR * q_max).tolist()
        if blown:
            return _infeasible("diverged", n, blown)
        if _converged(step, prev_step, scale, tol):
            break
        prev_step = step
    else:
        return _infeasible("max-iter", max_iter, [])

    final = [update(i, q, sc) for i in range(sc.cell_count)]
    stressed = [i for i, u in enumerate(final) if u.saturated]
    if stressed:
        return _infeasible("demand-stressed", n, stressed)
    allocation = _assemble(sc, final)
    over = np.flatnonzero(q > q_max * (1.0 + CAP_RTOL)).tolist()
    if over:
        result = _infeasible("power-cap", n, over, converged=True)
        result.allocation = allocation
        return result

    logger.info(
        "%s: converged in %d iterations, sum power %.4e W", label, n, float(q.sum()) * sc.bandwidth
    )
    return PmResult(
        status=SolveStatus.SOLVED,
        q=q,
        iterations=n,
        converged=True,
        allocation=allocation,
        multipliers=multipliers,
        trace=trace,
    )
