"""Exception hierarchy.

Infeasible problem instances are reported through result objects, not
exceptions; these classes cover malformed input and numerical faults.
"""

from __future__ import annotations


class LoadCouplingError(Exception):
    """Base class for all package errors."""


class BracketError(LoadCouplingError, ValueError):
    """A bracket could not be expanded to enclose a sign change."""


class NumericsError(LoadCouplingError, RuntimeError):
    """A refinement that must converge for finite input did not."""


class ScenarioError(LoadCouplingError, ValueError):
    """Scenario data is invalid or could not be generated."""


class ConfigError(LoadCouplingError, ValueError):
    """Experiment configuration is unreadable or invalid."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
