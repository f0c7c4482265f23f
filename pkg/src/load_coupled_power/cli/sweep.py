"""``lcp sweep``: run the configured algorithms over a demand grid."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any

import numpy as np
import pandas as pd

from ..config.experiment import ExperimentConfig
from ..config.settings import settings
from ..errors import ConfigError
from ..network.generator import generate_scenario
from ..network.scenario import NetworkScenario
from .artifacts import output_dir, write_csv
from .run import EXIT_OK, require_single_cell, solve

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "index",
    "demand_bps",
    "algorithm",
    "status",
    "feasible",
    "sum_power_w",
    "sum_rate_bps",
    "iterations",
    "reason",
]


def parse_range(text: str) -> tuple[float, float, int]:
    """Parse ``START:STOP:POINTS`` (bits/s, bits/s, count)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"range must look like START:STOP:POINTS, got {text!r}")
    try:
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as e:
        raise ConfigError(f"invalid range {text!r}: {e}") from e
    if points < 0 or (points > 0 and not (0 < start <= stop)):
        raise ConfigError(f"invalid range {text!r}: need 0 < START <= STOP and POINTS >= 0")
    return start, stop, points


def demand_grid(start: float, stop: float, points: int) -> np.ndarray:
    if points <= 0:
        return np.zeros(0)
    return np.linspace(start, stop, points)


def _sweep_point(
    index: int, demand: float, algorithm: str, sc: NetworkScenario, config: ExperimentConfig
) -> dict[str, Any]:
    outcome = solve(algorithm, sc.with_uniform_demand(demand), config)
    return {
        "index": index,
        "demand_bps": demand,
        "algorithm": algorithm,
        "status": outcome.status.value,
        "feasible": outcome.feasible,
        "sum_power_w": outcome.sum_power_w,
        "sum_rate_bps": outcome.sum_rate_bps,
        "iterations": outcome.iterations,
        "reason": outcome.reason or "",
    }


def run_sweep(config: ExperimentConfig, sc: NetworkScenario | None = None) -> pd.DataFrame:
    """One row per (demand, algorithm), ordered by demand index then algorithm.

    Points run on a bounded thread pool; row order does not depend on
    completion order.
    """
    sc = generate_scenario(config.scenario) if sc is None else sc
    for algorithm in config.sweep.algorithms:
        require_single_cell(algorithm, sc)
    demands = demand_grid(config.sweep.start_bps, config.sweep.stop_bps, config.sweep.points)
    tasks = [(k, float(d), a) for k, d in enumerate(demands) for a in config.sweep.algorithms]
    if not tasks:
        return pd.DataFrame(columns=SWEEP_COLUMNS)

    with ThreadPoolExecutor(max_workers=max(1, settings.sweep_workers)) as pool:
        futures = [pool.submit(_sweep_point, k, d, a, sc, config) for k, d, a in tasks]
        rows = [f.result() for f in futures]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def cmd_sweep(config: ExperimentConfig, param: str = "demand", span: str | None = None) -> int:
    """Write ``sweep.csv``; infeasible points are rows, not failures."""
    if param != "demand":
        raise ConfigError(f"unsupported sweep parameter {param!r}")
    if span is not None:
        start, stop, points = parse_range(span)
        config = ExperimentConfig.from_mapping(
            {
                **config.model_dump(),
                "sweep": {
                    **config.sweep.model_dump(),
                    "start_bps": start if points else config.sweep.start_bps,
                    "stop_bps": stop if points else config.sweep.stop_bps,
                    "points": points,
                },
            },
            source="command line",
        )
    frame = run_sweep(config)
    write_csv(frame, output_dir(config) / "sweep.csv", schema="sweep")
    infeasible = int((~frame["feasible"].astype(bool)).sum()) if len(frame) else 0
    logger.info("sweep: %d rows, %d infeasible points", len(frame), infeasible)
    return EXIT_OK
