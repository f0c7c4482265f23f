"""Experiment configuration file (YAML).

Every field has a default, so an empty file describes the standard
15-cell setup: 5 sites x 3 sectors, 30 users per cell, B = 18 MHz,
sigma^2 = -174 dBm/Hz, P_max = 10 W.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import ConfigError
from ..network.generator import ScenarioGenConfig

Algorithm = Literal["pm-sc", "rm-sc", "dtapc-pm", "dtapc-rm", "opv-pm"]
SINGLE_CELL_ALGORITHMS: frozenset[str] = frozenset({"pm-sc", "rm-sc"})


class SolverConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tolerance: float = Field(default=1e-8, gt=0)
    max_iter: int = Field(default=10_000, ge=1)
    max_sweeps: int = Field(default=500, ge=1)
    schedule: Literal["jacobi", "gauss-seidel"] = "jacobi"
    multistart: int = Field(default=8, ge=1)


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    param: Literal["demand"] = "demand"
    start_bps: float = Field(default=0.5e6, gt=0)
    stop_bps: float = Field(default=2.5e6, gt=0)
    points: int = Field(default=9, ge=0)
    algorithms: list[Algorithm] = Field(default_factory=lambda: ["dtapc-pm", "opv-pm", "dtapc-rm"])


class CheckConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    property_samples: int = Field(default=100, ge=1)
    uniqueness_inits: int = Field(default=10, ge=2)
    minimality_samples: int = Field(default=20, ge=1)
    oracle_instances: int = Field(default=10, ge=0)
    seed: int = Field(default=0, ge=0)


class ExperimentConfig(BaseModel):
    """One experiment: a generated scenario, an algorithm and its settings."""

    model_config = ConfigDict(extra="forbid")

    scenario: ScenarioGenConfig = Field(default_factory=ScenarioGenConfig)
    algorithm: Algorithm = "dtapc-pm"
    solver: SolverConfig = Field(default_factory=SolverConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    check: CheckConfig = Field(default_factory=CheckConfig)
    output_dir: str | None = None

    @model_validator(mode="after")
    def _sweep_order(self) -> ExperimentConfig:
        if self.sweep.points > 1 and self.sweep.stop_bps < self.sweep.start_bps:
            raise ValueError("sweep.stop_bps must not be below sweep.start_bps")
        return self

    @classmethod
    def from_yaml(cls, path: str | Path) -> ExperimentConfig:
        """Load and validate a config file.

        Raises:
            ConfigError: Unreadable file, malformed YAML (with line) or
                schema violation (with dotted field path).
        """
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            problem = getattr(e, "problem", None) or str(e)
            line = mark.line + 1 if mark is not None else None
            where = f", column {mark.column + 1}" if mark is not None else ""
            raise ConfigError(f"{path}: malformed YAML{where}: {problem}", line=line) from e
        return cls.from_mapping(data or {}, source=str(path))

    @classmethod
    def from_mapping(cls, data: Any, source: str = "<config>") -> ExperimentConfig:
        if not isinstance(data, dict):
            raise ConfigError(f"{source}: top level must be a mapping")
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            first = e.errors()[0]
            field_path = ".".join(str(p) for p in first["loc"]) or "<root>"
            raise ConfigError(f"{source}: {field_path}: {first['msg']}") from e

    def with_overrides(
        self,
        *,
        output_dir: str | None = None,
        seed: int | None = None,
        tolerance: float | None = None,
        max_iter: int | None = None,
        algorithm: str | None = None,
    ) -> ExperimentConfig:
        """Copy with command-line overrides applied and re-validated."""
        data = self.model_dump()
        if output_dir is not None:
            data["output_dir"] = output_dir
        if seed is not None:
            data["scenario"]["seed"] = seed
        if tolerance is not None:
            data["solver"]["tolerance"] = tolerance
        if max_iter is not None:
            data["solver"]["max_iter"] = max_iter
        if algorithm is not None:
            data["algorithm"] = algorithm
        return type(self).from_mapping(data, source="command line")
