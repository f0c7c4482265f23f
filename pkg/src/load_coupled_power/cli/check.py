"""``lcp check``: property suite on one seeded scenario."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from ..config.experiment import ExperimentConfig
from ..network.generator import generate_scenario
from ..network.io import load_scenario
from ..network.model import validate_allocation
from ..network.scenario import NetworkScenario
from ..oracle import grid_oracle_pm_sc, grid_oracle_rm_sc
from ..reports import CheckReport
from ..solvers.power_min import dtapc_pm
from ..solvers.properties import (
    fixed_point_residual,
    interference_property_check,
    minimality_check,
    uniqueness_check,
)
from ..solvers.single_cell import SingleCellProblem, kkt_residuals, pm_sc, rm_sc
from ..solvers.status import RmMode
from .artifacts import output_dir, write_yaml

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 3


def oracle_check(sc: NetworkScenario, instances: int, seed: int) -> CheckReport:
    """Closed forms against the grid oracles on small user subsets.

    Each instance draws 2 or 3 users of one cell; the rate-max cap is
    twice the minimum power of their demands.
    """
    report = CheckReport(name="single-cell-oracles")
    rng = np.random.default_rng(seed)
    for k in range(instances):
        i = int(rng.integers(sc.cell_count))
        users = np.arange(sc.user_count)[sc.users_of(i)]
        size = min(int(rng.integers(2, 4)), len(users))
        pick = rng.choice(users, size=size, replace=False)
        base = SingleCellProblem(sc.gains[i, pick], sc.demands[pick], sc.noise_density, sc.bandwidth)

        pm = pm_sc(base)
        pm_ref = grid_oracle_pm_sc(base)
        pm_gap = (pm.sum_power - pm_ref.objective) / pm_ref.objective
        report.record("pm-oracle", pm_gap)
        if pm_gap > 1e-4 or pm.sum_power > pm_ref.objective + pm_ref.error_bound:
            report.error(
                "pm-oracle",
                f"instance {k}: closed form {pm.sum_power:.6e} vs grid {pm_ref.objective:.6e}",
            )

        prob = base.with_power_cap(2.0 * pm.sum_power)
        rm = rm_sc(prob)
        rm_ref = grid_oracle_rm_sc(prob)
        rm_gap = (rm_ref.objective - rm.sum_rate) / rm_ref.objective
        report.record("rm-oracle", rm_gap)
        if rm_gap > 1e-3:
            report.error(
                "rm-oracle",
                f"instance {k}: closed form {rm.sum_rate:.6e} vs grid {rm_ref.objective:.6e}",
            )

        load_gap = max(abs(pm.loads.sum() - 1.0), abs(rm.loads.sum() - 1.0))
        report.record("full-load", load_gap)
        if load_gap > 1e-9:
            report.error("full-load", f"instance {k}: load sum off by {load_gap:.3e}")

        if rm.mode is RmMode.SURPLUS:
            residual = kkt_residuals(prob, rm).max
            report.record("kkt", residual)
            if residual > 1e-6:
                report.error("kkt", f"instance {k}: stationarity residual {residual:.3e}")
    report.data["instances"] = instances
    return report


def _pm_solution_check(sc: NetworkScenario, tol: float) -> CheckReport:
    report = CheckReport(name="dtapc-pm-solution")
    result = dtapc_pm(sc, tol=tol, record_trace=False)
    if not result.solved or result.allocation is None:
        report.skipped = True
        report.warn("dtapc-pm", f"scenario infeasible ({result.reason}); solution checks skipped")
        return report
    constraints = validate_allocation(result.allocation, sc, tol=1e-6)
    report.issues.extend(constraints.issues)
    report.worst.update(constraints.worst)
    residual = fixed_point_residual(sc, result.q)
    report.record("fixed-point", residual)
    if residual > 100.0 * tol:
        report.error("fixed-point", f"q* is not a fixed point of v (residual {residual:.3e})")
    return report


def _skipped(name: str) -> CheckReport:
    report = CheckReport(name=name, skipped=True)
    report.warn(name, "single-cell scenario: multi-cell check skipped")
    return report


def run_checks(config: ExperimentConfig, sc: NetworkScenario) -> list[CheckReport]:
    cfg = config.check
    reports = [
        oracle_check(sc, cfg.oracle_instances, cfg.seed),
        _pm_solution_check(sc, config.solver.tolerance),
    ]
    if sc.cell_count == 1:
        logger.info("single-cell scenario: skipping multi-cell property checks")
        reports += [_skipped(n) for n in ("interference-properties", "uniqueness", "minimality")]
    else:
        reports += [
            interference_property_check(sc, cfg.property_samples, cfg.seed),
            uniqueness_check(sc, cfg.uniqueness_inits, cfg.seed),
            minimality_check(sc, cfg.minimality_samples, cfg.seed),
        ]
    return reports


def cmd_check(config: ExperimentConfig, scenario_path: str | Path | None = None) -> int:
    """Write ``check_report.yaml``; exit 3 on any violation."""
    sc = load_scenario(scenario_path) if scenario_path else generate_scenario(config.scenario)
    reports = run_checks(config, sc)
    valid = all(r.ok for r in reports)
    write_yaml(
        {"valid": valid, "reports": [r.to_dict() for r in reports]},
        output_dir(config) / "check_report.yaml",
    )
    for r in reports:
        for issue in r.errors:
            logger.error("%s: %s", r.name, issue["message"])
    logger.info("check: %s", "all properties hold" if valid else "violations found")
    return EXIT_OK if valid else EXIT_VIOLATION
