"""Check reports shared by constraint validation and property suites.

A report is a list of issue dicts ({"check", "level", "message"}) plus the
worst margin seen per check. Checks never raise on a violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


def _err(check: str, msg: str) -> dict[str, str]:
    return {"check": check, "level": "error", "message": msg}


def _warn(check: str, msg: str) -> dict[str, str]:
    return {"check": check, "level": "warning", "message": msg}


@dataclass
class CheckReport:
    """Outcome of a batch of checks.

    Attributes:
        name: What was checked (e.g. "constraints", "interference-properties").
        issues: Issue dicts in the order they were found.
        worst: Worst margin per check; positive means violated by that amount.
        skipped: True when the check did not apply to the instance.
        data: Check-specific extras (sample counts, solutions).
    """

    name: str
    issues: list[dict[str, str]] = field(default_factory=list)
    worst: dict[str, float] = field(default_factory=dict)
    skipped: bool = False
    data: dict[str, Any] = field(default_factory=dict)

    @property
    def errors(self) -> list[dict[str, str]]:
        return [i for i in self.issues if i["level"] == "error"]

    @property
    def warnings(self) -> list[dict[str, str]]:
        return [i for i in self.issues if i["level"] == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, check: str, msg: str) -> None:
        self.issues.append(_err(check, msg))

    def warn(self, check: str, msg: str) -> None:
        self.issues.append(_warn(check, msg))

    def record(self, check: str, margin: float) -> None:
        """Keep the largest margin seen for ``check``."""
        self.worst[check] = max(self.worst.get(check, float("-inf")), float(margin))

    def violations(self, check: str) -> int:
        return sum(1 for i in self.errors if i["check"] == check)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "valid": self.ok,
            "skipped": self.skipped,
            "errors": self.errors,
            "warnings": self.warnings,
            "worst": dict(self.worst),
            "data": dict(self.data),
        }
