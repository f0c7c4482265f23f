"""Plain-text (YAML) dump format for scenarios and allocations.

Floats are written with ``repr`` precision, so a load reproduces the dumped
arrays bit for bit. A comment header states the units of every field.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
import yaml

from ..errors import ScenarioError
from .scenario import Allocation, NetworkScenario

FORMAT_VERSION = 1

_SCENARIO_HEADER = f"""\
# load-coupled-power scenario, format v{FORMAT_VERSION}
# units: gains linear (rows = BS, columns = users); demands bit/s;
#        power_limits W; noise_density W/Hz; bandwidth Hz
"""

_ALLOCATION_HEADER = f"""\
# load-coupled-power allocation, format v{FORMAT_VERSION}
# units: loads fraction of slot; transformed_power (load x density) W/Hz;
#        rates bit/s
"""


def _floats(values: np.ndarray) -> list[Any]:
    return np.asarray(values, dtype=float).tolist()


def scenario_to_dict(sc: NetworkScenario) -> dict[str, Any]:
    return {
        "kind": "scenario",
        "version": FORMAT_VERSION,
        "cell_count": sc.cell_count,
        "user_count": sc.user_count,
        "noise_density": float(sc.noise_density),
        "bandwidth": float(sc.bandwidth),
        "power_limits": _floats(sc.power_limits),
        "serving": [int(s) for s in sc.serving],
        "demands": _floats(sc.demands),
        "gains": _floats(sc.gains),
    }


def allocation_to_dict(alloc: Allocation) -> dict[str, Any]:
    return {
        "kind": "allocation",
        "version": FORMAT_VERSION,
        "cell_count": alloc.cell_count,
        "serving": [int(s) for s in alloc.serving],
        "loads": _floats(alloc.loads),
        "transformed_power": _floats(alloc.transformed_power),
        "rates": _floats(alloc.rates),
    }


def _require(data: Any, kind: str) -> dict[str, Any]:
    if not isinstance(data, dict):
        raise ScenarioError(f"expected a mapping for a {kind} document")
    if data.get("kind") != kind:
        raise ScenarioError(f"document kind is {data.get('kind')!r}, expected {kind!r}")
    if data.get("version") != FORMAT_VERSION:
        raise ScenarioError(f"unsupported {kind} format version {data.get('version')!r}")
    return data


def scenario_from_dict(data: Any) -> NetworkScenario:
    doc = _require(data, "scenario")
    try:
        return NetworkScenario(
            gains=np.array(doc["gains"], dtype=float),
            serving=np.array(doc["serving"], dtype=np.int64),
            demands=np.array(doc["demands"], dtype=float),
            power_limits=np.array(doc["power_limits"], dtype=float),
            noise_density=doc["noise_density"],
            bandwidth=doc["bandwidth"],
        )
    except KeyError as e:
        raise ScenarioError(f"scenario document misses field {e.args[0]!r}") from e


def allocation_from_dict(data: Any) -> Allocation:
    doc = _require(data, "allocation")
    try:
        return Allocation(
            serving=np.array(doc["serving"], dtype=np.int64),
            cell_count=doc["cell_count"],
            loads=np.array(doc["loads"], dtype=float),
            transformed_power=np.array(doc["transformed_power"], dtype=float),
            rates=np.array(doc["rates"], dtype=float),
        )
    except KeyError as e:
        raise ScenarioError(f"allocation document misses field {e.args[0]!r}") from e
    except ValueError as e:
        raise ScenarioError(f"invalid allocation document: {e}") from e


def _dump(header: str, data: dict[str, Any], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    body = yaml.safe_dump(data, sort_keys=False, default_flow_style=None, width=120)
    path.write_text(header + body, encoding="utf-8")


def _load(path: Path) -> Any:
    try:
        return yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark is not None else ""
        raise ScenarioError(f"{path}: malformed YAML{where}") from e


def dump_scenario(sc: NetworkScenario, path: str | Path) -> Path:
    path = Path(path)
    _dump(_SCENARIO_HEADER, scenario_to_dict(sc), path)
    return path


def load_scenario(path: str | Path) -> NetworkScenario:
    return scenario_from_dict(_load(Path(path)))


def dump_allocation(alloc: Allocation, path: str | Path) -> Path:
    path = Path(path)
    _dump(_ALLOCATION_HEADER, allocation_to_dict(alloc), path)
    return path


def load_allocation(path: str | Path) -> Allocation:
    return allocation_from_dict(_load(Path(path)))
