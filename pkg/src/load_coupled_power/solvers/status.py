"""Result status flags shared by all solvers."""

from __future__ import annotations

from enum import StrEnum


class SolveStatus(StrEnum):
    SOLVED = "solved"
    INFEASIBLE = "infeasible"


class RmMode(StrEnum):
    """Which KKT branch a rate-maximisation solution came from."""

    SURPLUS = "surplus"  # best user's rate constraint inactive
    BOUNDARY = "boundary"  # cap equals the minimum power of the demands
