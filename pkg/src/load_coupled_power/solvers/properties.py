"""Empirical checks of the power-minimisation fixed point.

The interference map v(q) is a standard interference function (positive,
monotone, scalable); its fixed point is unique and component-wise minimal
among all allocations that meet the demands. These checks sample each
property on a concrete scenario and report margins instead of raising.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..kernels import Bracket, bisect_monotone
from ..network.scenario import NetworkScenario
from ..reports import CheckReport
from .fixed_point import DEFAULT_TOL
from .power_min import dtapc_pm, interference_map

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

PROPERTY_SLACK = 1e-10


def fixed_point_residual(sc: NetworkScenario, q: ArrayLike) -> float:
    """max |v(q) - q| / max q."""
    q = np.asarray(q, dtype=float)
    return float(np.max(np.abs(interference_map(sc, q) - q)) / np.max(q))


def interference_property_check(
    sc: NetworkScenario,
    sample_count: int = 100,
    seed: int = 0,
    slack: float = PROPERTY_SLACK,
) -> CheckReport:
    """Sample positivity, monotonicity and scalability of v.

    Samples q1 uniformly in [0, 2 q_max] (the first sample is q1 = 0 with
    q2 = q1), q2 = q1 scaled elementwise by U[0, 1], and alpha in (1, 10].
    Margins are relative; positive means violated.
    """
    report = CheckReport(name="interference-properties")
    rng = np.random.default_rng(seed)
    upper = 2.0 * sc.q_max
    n = sc.cell_count

    for k in range(sample_count):
        if k == 0:
            q1 = np.zeros(n)
            q2 = q1.copy()
        else:
            q1 = rng.uniform(0.0, 1.0, n) * upper
            q2 = q1 * rng.uniform(0.0, 1.0, n)
        alpha = 1.0 + 9.0 * (1.0 - rng.random())

        v1 = interference_map(sc, q1)
        v2 = interference_map(sc, q2)
        v_scaled = interference_map(sc, alpha * q1)

        positivity = float(-np.min(v1 / sc.q_max))
        report.record("positivity", positivity)
        if not np.all(v1 > 0.0):
            report.error("positivity", f"sample {k}: v(q) has non-positive entries {v1.tolist()}")

        monotonicity = float(np.max((v2 - v1) / v1))
        report.record("monotonicity", monotonicity)
        if monotonicity > slack:
            report.error(
                "monotonicity",
                f"sample {k}: q1 >= q2 but v(q2) exceeds v(q1) by {monotonicity:.3e}",
            )

        scalability = float(np.max((v_scaled - alpha * v1) / (alpha * v1)))
        report.record("scalability", scalability)
        if scalability > slack:
            report.error(
                "scalability",
                f"sample {k}: v(alpha q) >= alpha v(q) for alpha={alpha:.4f} ({scalability:.3e})",
            )

    report.data["samples"] = sample_count
    logger.info("interference property check: %d samples, %d violations", sample_count, len(report.errors))
    return report


def uniqueness_check(
    sc: NetworkScenario,
    init_count: int = 10,
    seed: int = 0,
    tol: float = 1e-11,
    agreement: float = 1e-7,
) -> CheckReport:
    """Run the fixed point from several starts and compare the limits.

    Start 0 is q = P_max / B, start 1 is q = 0, the rest are uniform in
    [0, 2 P_max / B]. Agreement is relative to the first limit.
    """
    report = CheckReport(name="uniqueness")
    rng = np.random.default_rng(seed)
    n = sc.cell_count
    limits: list[FloatArray] = []

    for k in range(init_count):
        if k == 0:
            start = sc.q_max.copy()
        elif k == 1:
            start = np.zeros(n)
        else:
            start = rng.uniform(0.0, 2.0, n) * sc.q_max
        result = dtapc_pm(sc, tol=tol, initial_q=start, record_trace=False)
        if not result.converged:
            report.error("uniqueness", f"start {k}: no fixed point reached ({result.reason})")
            continue
        limits.append(result.q)

    if limits:
        reference = limits[0]
        spread = max(float(np.max(np.abs(q - reference) / reference)) for q in limits)
        report.record("uniqueness", spread - agreement)
        if spread > agreement:
            report.error("uniqueness", f"fixed points disagree by {spread:.3e} (allowed {agreement:.1e})")
        report.data["q_star"] = reference.tolist()
        report.data["spread"] = spread
    report.data["starts"] = init_count
    return report


def _full_load_powers(sc: NetworkScenario, loads: FloatArray) -> FloatArray | None:
    """Cell powers that meet every demand exactly with fixed ``loads``.

    With loads fixed, q_i = sum_j e_ij (sum_k q_k g_kj + sigma^2) / g_ij with
    e_ij = m_ij (exp(ln2 D_ij / (B m_ij)) - 1), a linear system. Returns
    None when it has no nonnegative solution.
    """
    excess = loads * np.expm1(math.log(2.0) * sc.demands / (sc.bandwidth * loads))
    weight = excess / sc.serving_gains
    coupling = np.zeros((sc.cell_count, sc.cell_count))
    offset = np.zeros(sc.cell_count)
    for i in range(sc.cell_count):
        users = sc.users_of(i)
        coupling[i] = sc.cross_gains[:, users] @ weight[users]
        offset[i] = sc.noise_density * weight[users].sum()
    if np.max(np.abs(np.linalg.eigvals(coupling))) >= 1.0:
        return None
    q = np.linalg.solve(np.eye(sc.cell_count) - coupling, offset)
    return q if np.all(q >= 0.0) else None


def minimality_check(
    sc: NetworkScenario,
    sample_count: int = 20,
    seed: int = 0,
    epsilon: float = 0.3,
    slack: float = 1e-9,
) -> CheckReport:
    """Check that perturbed full-load allocations need at least q* per cell.

    Loads are moved off the optimum as m' = (1 - eps) m* + eps Dirichlet(1),
    powers follow from meeting every demand exactly.
    """
    report = CheckReport(name="minimality")
    pm = dtapc_pm(sc, tol=1e-12, record_trace=False)
    if pm.allocation is None or not pm.converged:
        report.skipped = True
        report.warn("minimality", f"no fixed point to compare against ({pm.reason})")
        return report

    rng = np.random.default_rng(seed)
    q_star = pm.q
    base = pm.allocation.loads
    unbounded = 0
    for k in range(sample_count):
        loads = (1.0 - epsilon) * base
        for i in range(sc.cell_count):
            users = sc.users_of(i)
            loads[users] += epsilon * rng.dirichlet(np.ones(users.stop - users.start))
        q = _full_load_powers(sc, loads)
        if q is None:
            unbounded += 1
            continue
        margin = float(np.max((q_star - q) / q_star))
        report.record("minimality", margin)
        if margin > slack:
            cells = np.flatnonzero((q_star - q) / q_star > slack).tolist()
            report.error("minimality", f"sample {k}: perturbed powers below q* in cells {cells}")

    report.data["samples"] = sample_count
    report.data["unbounded"] = unbounded
    return report


def find_feasibility_edge(
    sc: NetworkScenario,
    lo: float = 1e4,
    hi: float = 1e7,
    rel_tol: float = 1e-3,
    tol: float = DEFAULT_TOL,
) -> float:
    """Largest uniform demand (bits/s) whose power-min fixed point fits the caps.

    Bisection on log D; the bracket is widened by factors of two until the
    lower end is feasible and the upper end is not. Accurate to ``rel_tol``.
    """

    def feasible(log_d: float) -> bool:
        return dtapc_pm(sc.with_uniform_demand(math.exp(log_d)), tol=tol, record_trace=False).solved

    log_lo, log_hi = math.log(lo), math.log(hi)
    for _ in range(60):
        if feasible(log_lo):
            break
        log_hi, log_lo = log_lo, log_lo - math.log(2.0)
    else:
        raise ValueError("no feasible uniform demand found")
    for _ in range(60):
        if not feasible(log_hi):
            break
        log_lo, log_hi = log_hi, log_hi + math.log(2.0)
    else:
        raise ValueError("uniform demand stays feasible beyond any tested bound")

    edge = bisect_monotone(
        lambda s: 1.0 if not feasible(s) else -1.0,
        Bracket(lo=log_lo, hi=log_hi, tolerance=rel_tol),
    )
    logger.info("feasibility edge at %.6e bit/s", math.exp(edge))
    return math.exp(edge)
