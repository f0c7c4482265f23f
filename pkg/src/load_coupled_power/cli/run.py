"""``lcp run``: solve one scenario with one algorithm and write artifacts."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import pandas as pd

from ..config.experiment import SINGLE_CELL_ALGORITHMS, ExperimentConfig
from ..errors import ConfigError
from ..network.generator import generate_scenario
from ..network.io import dump_allocation, dump_scenario
from ..network.model import validate_allocation
from ..network.scenario import Allocation, NetworkScenario
from ..solvers.power_min import dtapc_pm
from ..solvers.rate_max import dtapc_rm
from ..solvers.single_cell import SingleCellProblem, pm_sc, rm_sc
from ..solvers.status import SolveStatus
from ..solvers.uniform_power import opv_pm
from .artifacts import (
    output_dir,
    pm_trace_frame,
    rm_sweep_frame,
    rm_update_frame,
    write_csv,
    write_yaml,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INFEASIBLE = 2


@dataclass
class Outcome:
    """Algorithm-independent view of a solve, as the CLI reports it."""

    algorithm: str
    status: SolveStatus
    allocation: Allocation | None
    sum_power_w: float
    sum_rate_bps: float
    iterations: int
    reason: str | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)
    traces: dict[str, pd.DataFrame] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status is SolveStatus.SOLVED


def require_single_cell(algorithm: str, sc: NetworkScenario) -> None:
    if algorithm in SINGLE_CELL_ALGORITHMS and sc.cell_count != 1:
        raise ConfigError(
            f"{algorithm} needs a single-cell scenario (site_count: 1, sectors_per_site: 1), "
            f"got {sc.cell_count} cells"
        )


def _single_cell(algorithm: str, sc: NetworkScenario) -> Outcome:
    prob = SingleCellProblem.from_scenario(sc)
    sol = pm_sc(prob) if algorithm == "pm-sc" else rm_sc(prob)
    alloc = Allocation(sc.serving, 1, sol.loads, sol.transformed_power, sol.rates)
    return Outcome(
        algorithm=algorithm,
        status=sol.status,
        allocation=alloc if sol.solved else None,
        sum_power_w=sol.sum_power * sc.bandwidth,
        sum_rate_bps=sol.sum_rate,
        iterations=0,
        reason=None if sol.solved else "power-cap",
        diagnostics={
            "mode": sol.mode,
            "multipliers": sol.multipliers,
            "min_power_w": sol.min_power * sc.bandwidth,
            "power_deficit_w": sol.power_deficit * sc.bandwidth,
            "tie_perturbation": sol.tie_perturbation,
        },
    )


def _power_min(algorithm: str, sc: NetworkScenario, config: ExperimentConfig) -> Outcome:
    solver = dtapc_pm if algorithm == "dtapc-pm" else opv_pm
    result = solver(
        sc,
        tol=config.solver.tolerance,
        max_iter=config.solver.max_iter,
        schedule=config.solver.schedule,
    )
    alloc = result.allocation
    return Outcome(
        algorithm=algorithm,
        status=result.status,
        allocation=alloc,
        sum_power_w=result.sum_power_watts(sc.bandwidth),
        sum_rate_bps=alloc.sum_rate if alloc is not None else float("nan"),
        iterations=result.iterations,
        reason=result.reason,
        diagnostics={
            "converged": result.converged,
            "cell_power_w": result.q * sc.bandwidth,
            "multipliers": result.multipliers,
            "offending_cells": result.offending_cells,
            "excess_w": result.excess * sc.bandwidth if result.offending_cells else [],
        },
        traces={"trace": pm_trace_frame(result, sc.bandwidth)},
    )


def _rate_max(sc: NetworkScenario, config: ExperimentConfig) -> Outcome:
    result = dtapc_rm(
        sc,
        tol=config.solver.tolerance,
        max_sweeps=config.solver.max_sweeps,
        multistart=config.solver.multistart,
        seed=config.scenario.seed,
    )
    alloc = result.allocation
    return Outcome(
        algorithm="dtapc-rm",
        status=result.status,
        allocation=alloc,
        sum_power_w=(
            alloc.cell_powers().total * sc.bandwidth if alloc is not None else float("nan")
        ),
        sum_rate_bps=result.sum_rate if alloc is not None else float("nan"),
        iterations=result.sweeps,
        reason=result.reason,
        diagnostics={
            "converged": result.converged,
            "start_sum_rates": result.start_sum_rates,
            "best_start": result.best_start,
            "compliance": [
                {
                    "cell": c.cell,
                    "full_load": c.full_load,
                    "others_at_demand": c.others_at_demand,
                    "surplus_user_is_best": c.surplus_user_is_best,
                }
                for c in result.compliance
            ],
        },
        traces={"trace": rm_sweep_frame(result), "updates": rm_update_frame(result)},
    )


def solve(algorithm: str, sc: NetworkScenario, config: ExperimentConfig) -> Outcome:
    """Dispatch ``algorithm`` on ``sc``."""
    require_single_cell(algorithm, sc)
    if algorithm in SINGLE_CELL_ALGORITHMS:
        return _single_cell(algorithm, sc)
    if algorithm in ("dtapc-pm", "opv-pm"):
        return _power_min(algorithm, sc, config)
    if algorithm == "dtapc-rm":
        return _rate_max(sc, config)
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def cmd_run(config: ExperimentConfig) -> int:
    """Generate the scenario, solve it and write the run directory.

    Files: scenario.yaml, diagnostics.yaml, allocation.yaml (when an
    allocation exists) and trace CSVs for iterative algorithms.
    """
    sc = generate_scenario(config.scenario)
    require_single_cell(config.algorithm, sc)
    out = output_dir(config)
    dump_scenario(sc, out / "scenario.yaml")

    outcome = solve(config.algorithm, sc, config)
    diagnostics: dict[str, Any] = {
        "algorithm": outcome.algorithm,
        "status": outcome.status,
        "reason": outcome.reason,
        "iterations": outcome.iterations,
        "sum_power_w": outcome.sum_power_w,
        "sum_rate_bps": outcome.sum_rate_bps,
        "cells": sc.cell_count,
        "users": sc.user_count,
        **outcome.diagnostics,
    }
    if outcome.allocation is not None:
        dump_allocation(outcome.allocation, out / "allocation.yaml")
        diagnostics["constraints"] = validate_allocation(outcome.allocation, sc, tol=1e-6).to_dict()
    for name, frame in outcome.traces.items():
        write_csv(frame, out / f"{name}.csv", schema=f"{outcome.algorithm}-{name}")
    write_yaml(diagnostics, out / "diagnostics.yaml")

    if not outcome.feasible:
        logger.warning("%s: infeasible (%s); diagnostics in %s", outcome.algorithm, outcome.reason, out)
        return EXIT_INFEASIBLE
    logger.info(
        "%s: sum power %.4e W, sum rate %.4e bit/s; results in %s",
        outcome.algorithm, outcome.sum_power_w, outcome.sum_rate_bps, out,
    )
    return EXIT_OK

