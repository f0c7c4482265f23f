"""Output files: versioned CSV tables, YAML diagnostics, trace tables."""

from __future__ import annotations

import logging
from collections.abc import Mapping
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import yaml

from ..config.experiment import ExperimentConfig
from ..config.settings import settings
from ..solvers.fixed_point import PmResult
from ..solvers.rate_max import RmResult

logger = logging.getLogger(__name__)


def output_dir(config: ExperimentConfig) -> Path:
    path = Path(config.output_dir or settings.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def plain(value: Any) -> Any:
    """Convert numpy and enum values into YAML-safe builtins."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Mapping):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    return value


def write_yaml(data: Mapping[str, Any], path: Path) -> Path:
    path.write_text(yaml.safe_dump(plain(data), sort_keys=False), encoding="utf-8")
    return path


def write_csv(frame: pd.DataFrame, path: Path, schema: str) -> Path:
    """Write ``frame`` after a ``# schema: lcp-<schema>/v<N>`` comment line."""
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write(f"# schema: lcp-{schema}/v{settings.csv_schema_version}\n")
        frame.to_csv(f, index=False, lineterminator="\n")
    logger.info("wrote %s (%d rows)", path, len(frame))
    return path


def pm_trace_frame(result: PmResult, bandwidth: float) -> pd.DataFrame:
    """One row per iteration: residual and every cell's power in W."""
    rows = []
    for it in result.trace:
        row: dict[str, Any] = {"iteration": it.iteration, "residual": it.residual}
        for i, q in enumerate(it.q):
            row[f"power_w_{i}"] = float(q) * bandwidth
        rows.append(row)
    return pd.DataFrame(rows)


def rm_sweep_frame(result: RmResult) -> pd.DataFrame:
    return pd.DataFrame(
        {"sweep": range(len(result.sum_rate_trace)), "sum_rate_bps": result.sum_rate_trace}
    )


def rm_update_frame(result: RmResult) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "sweep": r.sweep,
                "cell": r.cell,
                "sum_rate_bps": r.sum_rate,
                "cap_w_per_hz": r.cap,
                "skipped": r.skipped,
            }
            for r in result.update_trace
        ],
        columns=["sweep", "cell", "sum_rate_bps", "cap_w_per_hz", "skipped"],
    )
