"""Guarded bisection for monotone scalar equations.

Every "solve by bisection" step of the solvers goes through
:func:`bisect_monotone`: the bracket is first widened geometrically until it
encloses a sign change, then refined with :func:`scipy.optimize.bisect`.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from ..errors import BracketError, NumericsError

logger = logging.getLogger(__name__)

# scipy.optimize.bisect rejects rtol below 4 * machine epsilon.
_MIN_RTOL = 4.0 * float(np.finfo(float).eps)


@dataclass(frozen=True)
class Bracket:
    """Search interval for a monotone scalar equation f(x) = 0.

    Attributes:
        lo: Lower end of the initial interval.
        hi: Upper end of the initial interval.
        f_lo_sign: Sign of f at ``lo`` once known (0 = not evaluated yet).
        tolerance: Absolute tolerance on the returned argument.
        max_expansions: Geometric widening steps allowed before giving up.
        expansion_factor: Width multiplier applied per widening step.
        lower_limit: The interval never extends below this value.
        upper_limit: The interval never extends above this value.
        max_iter: Refinement iterations allowed after bracketing.
    """

    lo: float
    hi: float
    f_lo_sign: int = 0
    tolerance: float = 1e-12
    max_expansions: int = 60
    expansion_factor: float = 2.0
    lower_limit: float = -math.inf
    upper_limit: float = math.inf
    max_iter: int = 200

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")
        if self.tolerance <= 0:
            raise ValueError("bracket tolerance must be positive")
        if self.expansion_factor <= 1.0:
            raise ValueError("expansion_factor must exceed 1")
        if self.lo < self.lower_limit or self.hi > self.upper_limit:
            raise ValueError("initial bracket lies outside its limits")


def _checked(f: Callable[[float], float], x: float) -> float:
    value = float(f(x))
    if math.isnan(value):
        raise NumericsError(f"target function returned NaN at x={x!r}")
    return value


def expand_bracket(f: Callable[[float], float], bracket: Bracket) -> Bracket:
    """Widen ``bracket`` until f changes sign across it.

    For a monotone f the root lies beyond the endpoint with the smaller
    residual, so only that endpoint moves; the other one jumps onto the old
    position of the moving end, which keeps the interval tight.

    Raises:
        BracketError: No sign change after ``max_expansions`` steps, or a
            limit blocks further widening.
    """
    lo, hi = bracket.lo, bracket.hi
    f_lo, f_hi = _checked(f, lo), _checked(f, hi)

    for step in range(bracket.max_expansions + 1):
        if f_lo == 0.0 or f_hi == 0.0 or (f_lo < 0.0) != (f_hi < 0.0):
            return replace(bracket, lo=lo, hi=hi, f_lo_sign=int(np.sign(f_lo)))
        if step == bracket.max_expansions:
            break

        width = (hi - lo) * bracket.expansion_factor
        if abs(f_hi) <= abs(f_lo):
            new_hi = min(hi + width, bracket.upper_limit)
            if new_hi <= hi:
                break
            lo, f_lo = hi, f_hi
            hi, f_hi = new_hi, _checked(f, new_hi)
        else:
            new_lo = max(lo - width, bracket.lower_limit)
            if new_lo >= lo:
                break
            hi, f_hi = lo, f_lo
            lo, f_lo = new_lo, _checked(f, new_lo)

    raise BracketError(
        f"no sign change in [{lo!r}, {hi!r}] "
        f"(f={f_lo:.3e}, {f_hi:.3e}) after {bracket.max_expansions} expansions"
    )


def bisect_monotone(f: Callable[[float], float], bracket: Bracket) -> float:
    """Find the root of a monotone scalar function.

    Args:
        f: Monotone (either direction) continuous function.
        bracket: Initial interval and tolerances; widened automatically.

    Returns:
        x with |x - x*| <= tolerance + 4 eps |x*|. Identical inputs give
        bit-identical output.

    Raises:
        BracketError: The equation has no sign change within reach.
        NumericsError: Refinement did not converge within ``max_iter``.
    """
    enclosing = expand_bracket(f, bracket)
    lo, hi = enclosing.lo, enclosing.hi
    if f(lo) == 0.0:
        return lo
    if f(hi) == 0.0:
        return hi

    root, info = optimize.bisect(
        f,
        lo,
        hi,
        xtol=bracket.tolerance,
        rtol=_MIN_RTOL,
        maxiter=bracket.max_iter,
        full_output=True,
        disp=False,
    )
    if not info.converged:
        raise NumericsError(
            f"bisection did not converge in {bracket.max_iter} iterations "
            f"on [{lo!r}, {hi!r}]"
        )
    logger.debug("bisection converged to %r in %d iterations", root, info.iterations)
    return float(root)
