"""Sequential best-response sum-rate maximisation (DTAPC-RM).

Cells take turns re-solving their single-cell rate-maximisation problem
with everyone else frozen. A cell sees its users through effective gains
g_ij / (interference + noise), and its power is capped so that no frozen
foreign user drops below its recorded rate:

    cap_kl = p_kl g_kl / (m_kl g_il (2^(r_kl / (B m_kl)) - 1)) - E_kli / g_il

where E_kli is the interference-plus-noise at user l without cell i. The
recorded sum rate never decreases from one update to the next.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ..network.model import user_rates, with_actual_rates
from ..network.scenario import Allocation, NetworkScenario
from .fixed_point import PmResult
from .power_min import dtapc_pm
from .single_cell import SingleCellProblem, rm_sc
from .status import SolveStatus

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

LN2 = math.log(2.0)
DEFAULT_TOL = 1e-8
DEFAULT_MAX_SWEEPS = 500
DEFAULT_MULTISTART = 8
RATE_GUARD_RTOL = 1e-12


def effective_gains(alloc: Allocation, sc: NetworkScenario, i: int) -> FloatArray:
    """Effective gains of every user of cell ``i``."""
    users = sc.users_of(i)
    interference = sc.cross_gains[:, users].T @ alloc.cell_powers().values + sc.noise_density
    return sc.gains[i, users] / interference


def effective_gain(alloc: Allocation, sc: NetworkScenario, i: int, j: int) -> float:
    """g_ij over the interference-plus-noise density at user ``j``."""
    if int(sc.serving[j]) != i:
        raise ValueError(f"user {j} is not served by cell {i}")
    return float(effective_gains(alloc, sc, i)[j - sc.users_of(i).start])


def coupled_power_cap(alloc: Allocation, sc: NetworkScenario, i: int) -> float:
    """Largest power density cell ``i`` may use without hurting frozen foreign users.

    Users with zero load or zero recorded rate impose no limit. A
    non-positive return means the foreign rates leave no room at all.
    """
    cap = float(sc.q_max[i])
    foreign = np.flatnonzero(sc.serving != i)
    if foreign.size == 0:
        return cap
    m = alloc.loads[foreign]
    binding = (m > 0.0) & (alloc.rates[foreign] > 0.0)
    if not np.any(binding):
        return cap
    users = foreign[binding]
    m = m[binding]

    q_without = alloc.cell_powers().others(i)
    background = sc.cross_gains[:, users].T @ q_without + sc.noise_density
    g_own = sc.serving_gains[users]
    g_from_i = sc.gains[i, users]
    needed_sinr = np.expm1(LN2 * alloc.rates[users] / (sc.bandwidth * m))
    limits = alloc.transformed_power[users] * g_own / (m * g_from_i * needed_sinr) - background / g_from_i
    return float(min(cap, float(limits.min())))


@dataclass(frozen=True, eq=False)
class CellRmUpdate:
    """One best-response step of one cell."""

    cell: int
    loads: FloatArray
    power: FloatArray
    rates: FloatArray
    cap: float
    effective_gains: FloatArray
    skipped: bool = False


def per_cell_rm(i: int, frozen: Allocation, sc: NetworkScenario) -> CellRmUpdate:
    """Re-optimise cell ``i`` against the frozen allocation.

    Keeps the cell's previous allocation when the coupled cap cannot carry
    its demands, or when the new solution would lower its own sum rate.
    """
    users = sc.users_of(i)
    gains = effective_gains(frozen, sc, i)
    cap = coupled_power_cap(frozen, sc, i)
    previous = CellRmUpdate(
        cell=i,
        loads=frozen.loads[users],
        power=frozen.transformed_power[users],
        rates=frozen.rates[users],
        cap=cap,
        effective_gains=gains,
        skipped=True,
    )
    if cap <= 0.0:
        logger.warning("dtapc-rm: cell %d has no power headroom (cap %.3e), skipping", i, cap)
        return previous

    sol = rm_sc(SingleCellProblem.from_effective_gains(gains, sc.demands[users], sc.bandwidth, cap))
    if not sol.solved:
        logger.warning(
            "dtapc-rm: cell %d cap %.3e below its minimum power %.3e, skipping", i, cap, sol.min_power
        )
        return previous
    old_rate = float(frozen.rates[users].sum())
    if sol.sum_rate < old_rate * (1.0 - RATE_GUARD_RTOL):
        logger.debug("dtapc-rm: cell %d update would lower its rate, keeping previous", i)
        return previous
    return CellRmUpdate(
        cell=i,
        loads=sol.loads,
        power=sol.transformed_power,
        rates=sol.rates,
        cap=cap,
        effective_gains=gains,
    )


@dataclass(frozen=True)
class RmUpdateRecord:
    """Trace row written after every per-cell update."""

    sweep: int
    cell: int
    sum_rate: float
    cap: float
    skipped: bool


@dataclass(frozen=True)
class CellCompliance:
    """Full-load and surplus-structure flags of one cell's final allocation."""

    cell: int
    full_load: bool
    others_at_demand: bool
    surplus_user_is_best: bool

    @property
    def ok(self) -> bool:
        return self.full_load and self.others_at_demand and self.surplus_user_is_best


@dataclass(eq=False)
class RmResult:
    """Outcome of :func:`dtapc_rm`.

    ``allocation`` carries the achievable rates of the final loads and
    powers; ``sum_rate_trace`` holds the recorded sum rate after every
    sweep, starting with the initial allocation. ``sweeps`` counts every
    sweep run, including a last one that only confirms no further gain; a
    single cell stops after its first sweep.
    """

    status: SolveStatus
    allocation: Allocation | None = None
    sweeps: int = 0
    converged: bool = False
    sum_rate_trace: list[float] = field(default_factory=list)
    update_trace: list[RmUpdateRecord] = field(default_factory=list)
    compliance: list[CellCompliance] = field(default_factory=list)
    start_sum_rates: list[float] = field(default_factory=list)
    best_start: int = 0
    reason: str | None = None
    initializer: PmResult | None = None

    @property
    def solved(self) -> bool:
        return self.status is SolveStatus.SOLVED

    @property
    def sum_rate(self) -> float:
        return self.allocation.sum_rate if self.allocation is not None else 0.0


def scaled_pm_start(pm: Allocation, sc: NetworkScenario, factors: FloatArray | None = None) -> Allocation:
    """Power-min allocation with every power scaled by one factor t >= 1.

    t is the largest factor that keeps each cell under factors_i * q_max_i
    (factors default to 1). Raising every power by the same factor raises
    every SINR, so the start is feasible and its recorded rates are the
    achievable ones.
    """
    q = pm.cell_powers().values
    limits = sc.q_max * (np.ones(sc.cell_count) if factors is None else np.asarray(factors, float))
    t = max(1.0, float(np.min(limits / q)))
    scaled = Allocation(pm.serving, pm.cell_count, pm.loads, pm.transformed_power * t, pm.rates)
    return with_actual_rates(scaled, sc)


def check_compliance(
    alloc: Allocation, sc: NetworkScenario, rtol: float = 1e-6
) -> list[CellCompliance]:
    """Check full load and single-surplus-user structure per cell."""
    out = []
    rates = user_rates(alloc, sc)
    for i in range(sc.cell_count):
        users = sc.users_of(i)
        gains = effective_gains(alloc, sc, i)
        best = int(np.argmax(gains))
        surplus = (rates[users] - sc.demands[users]) / sc.demands[users]
        others = np.delete(surplus, best)
        above = np.flatnonzero(surplus > rtol)
        out.append(
            CellCompliance(
                cell=i,
                full_load=abs(float(alloc.loads[users].sum()) - 1.0) <= 1e-9,
                others_at_demand=bool(np.all(np.abs(others) <= rtol)),
                surplus_user_is_best=above.size == 0 or (above.size == 1 and int(above[0]) == best),
            )
        )
    return out


def _best_response(
    sc: NetworkScenario,
    start: Allocation,
    tol: float,
    max_sweeps: int,
) -> tuple[Allocation, list[float], list[RmUpdateRecord], int, bool]:
    alloc = start
    trace = [alloc.sum_rate]
    updates: list[RmUpdateRecord] = []
    converged = False
    sweep = 0
    for sweep in range(1, max_sweeps + 1):
        for i in range(sc.cell_count):
            upd = per_cell_rm(i, alloc, sc)
            if not upd.skipped:
                alloc = alloc.with_cell(sc.users_of(i), upd.loads, upd.power, upd.rates)
            updates.append(RmUpdateRecord(sweep, i, alloc.sum_rate, upd.cap, upd.skipped))
        trace.append(alloc.sum_rate)
        improvement = (trace[-1] - trace[-2]) / trace[-2]
        logger.debug("dtapc-rm: sweep %d sum rate %.6e (+%.3e)", sweep, trace[-1], improvement)
        # a lone cell has nothing to respond to after its first update
        if improvement <= tol or sc.cell_count == 1:
            converged = True
            break
    return alloc, trace, updates, sweep, converged


def dtapc_rm(
    sc: NetworkScenario,
    init: Allocation | None = None,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    multistart: int = DEFAULT_MULTISTART,
    *,
    seed: int = 0,
    pm_tol: float = 1e-10,
) -> RmResult:
    """Maximise the sum rate by sequential per-cell best responses.

    With ``init=None`` the start is the power-min solution scaled up to the
    caps; further starts scale toward caps shrunk by seeded factors in
    [0.5, 1]. The best final sum rate over all starts is returned. An
    explicit ``init`` is used as the only start.
    """
    if max_sweeps < 1 or multistart < 1:
        raise ValueError("max_sweeps and multistart must be >= 1")

    pm: PmResult | None = None
    if init is not None:
        starts = [init]
    else:
        pm = dtapc_pm(sc, tol=pm_tol, record_trace=False)
        if not pm.solved or pm.allocation is None:
            logger.warning("dtapc-rm: demands are infeasible (%s)", pm.reason)
            return RmResult(status=SolveStatus.INFEASIBLE, reason=pm.reason, initializer=pm)
        rng = np.random.default_rng(seed)
        starts = [scaled_pm_start(pm.allocation, sc)]
        for _ in range(multistart - 1):
            starts.append(scaled_pm_start(pm.allocation, sc, rng.uniform(0.5, 1.0, sc.cell_count)))

    best: RmResult | None = None
    start_rates = []
    for k, start in enumerate(starts):
        alloc, trace, updates, sweeps, converged = _best_response(sc, start, tol, max_sweeps)
        start_rates.append(trace[-1])
        if best is None or trace[-1] > best.sum_rate_trace[-1]:
            best = RmResult(
                status=SolveStatus.SOLVED,
                allocation=alloc,
                sweeps=sweeps,
                converged=converged,
                sum_rate_trace=trace,
                update_trace=updates,
                best_start=k,
                initializer=pm,
            )
    assert best is not None and best.allocation is not None
    best.start_sum_rates = start_rates
    best.allocation = with_actual_rates(best.allocation, sc)
    best.compliance = check_compliance(best.allocation, sc)
    logger.info(
        "dtapc-rm: sum rate %.6e bit/s after %d sweeps (start %d of %d)",
        best.sum_rate, best.sweeps, best.best_start, len(starts),
    )
    return best
