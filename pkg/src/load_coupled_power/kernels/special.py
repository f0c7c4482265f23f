"""Special functions of the KKT solutions and their inverses.

    u(x) = x e^x - e^x + 1,      x >= 0   (power-minimisation multiplier)
    w(x) = x (ln x - 1 + 1/x),   x >= 1   (rate-maximisation multiplier)

Both are strictly increasing and convex on their domains. The inverses are
seeded from the principal Lambert-W branch and polished by safeguarded
Newton steps; elements that still miss the residual tolerance fall back to
:func:`bisect_monotone`.

All functions accept scalars or arrays and return the same kind.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from typing import overload

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import lambertw

from ..errors import NumericsError
from .bisection import Bracket, bisect_monotone

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

RESIDUAL_RTOL = 1e-10
_NEWTON_MAX_STEPS = 60
_STEP_RTOL = 4.0 * float(np.finfo(float).eps)
# Newton settles at this relative step, or once steps stop shrinking below _NOISE_RTOL
_SETTLE_RTOL = 1e-13
_NOISE_RTOL = 1e-8
_SERIES_CUTOFF = 0.1
_LOG_OVERFLOW = 700.0

# u(x) = sum_{k>=2} (k-1)/k! x^k, stored as coefficients of x^(k-2), highest first.
_U_SERIES = np.array([(k - 1) / math.factorial(k) for k in range(14, 1, -1)])
# w(1+d) = sum_{k>=2} (-1)^k d^k / (k(k-1)), same layout.
_W_SERIES = np.array([(-1.0) ** k / (k * (k - 1)) for k in range(16, 1, -1)])


@overload
def _like(template: float, values: FloatArray) -> float: ...
@overload
def _like(template: ArrayLike, values: FloatArray) -> float | FloatArray: ...
def _like(template: ArrayLike, values: FloatArray) -> float | FloatArray:
    if np.ndim(template) == 0:
        return float(values.reshape(-1)[0])
    return values.reshape(np.shape(template))


def _as_flat(x: ArrayLike) -> FloatArray:
    return np.atleast_1d(np.asarray(x, dtype=float)).astype(float, copy=True).ravel()


# ---------------------------------------------------------------------------
# u(x)
# ---------------------------------------------------------------------------


def _u(x: FloatArray) -> FloatArray:
    out = np.empty_like(x)
    small = x < _SERIES_CUTOFF
    xs = x[small]
    out[small] = xs * xs * np.polyval(_U_SERIES, xs)
    xl = x[~small]
    with np.errstate(over="ignore"):
        out[~small] = np.exp(xl) * (xl - 1.0) + 1.0
    return out


def _u_prime(x: FloatArray) -> FloatArray:
    with np.errstate(over="ignore"):
        return x * np.exp(x)


def u_eval(x: ArrayLike) -> float | FloatArray:
    """Evaluate u(x) = x e^x - e^x + 1 for x >= 0."""
    flat = _as_flat(x)
    if np.any(~(flat >= 0.0)):
        raise ValueError("u_eval requires x >= 0")
    return _like(x, _u(flat))


def log_u_eval(x: ArrayLike) -> float | FloatArray:
    """ln u(x), finite for x > 700 where u itself overflows."""
    flat = _as_flat(x)
    if np.any(~(flat >= 0.0)):
        raise ValueError("log_u_eval requires x >= 0")
    out = np.empty_like(flat)
    big = flat > 1.0
    xb = flat[big]
    # u(x) = e^x (x - 1 + e^-x)
    out[big] = xb + np.log(xb - 1.0 + np.exp(-xb))
    with np.errstate(divide="ignore"):
        out[~big] = np.log(_u(flat[~big]))
    return _like(x, out)


def _u_inv_positive(y: FloatArray) -> FloatArray:
    # u(x) = y  <=>  (x - 1) e^(x - 1) = (y - 1) / e
    seed = 1.0 + lambertw((y - 1.0) / math.e).real
    tiny = y < 1e-4
    s = np.sqrt(2.0 * y[tiny])
    seed[tiny] = s - s * s / 3.0
    return _polish(_u, _u_prime, y, seed, lower=0.0, name="u_inv")


def u_inv(y: ArrayLike) -> float | FloatArray:
    """Inverse of u on [0, inf): returns x >= 0 with u(x) = y.

    ``u_inv(0)`` is exactly 0 without iteration.
    """
    flat = _as_flat(y)
    if np.any(~(flat >= 0.0)):
        raise ValueError("u_inv requires y >= 0")
    out = np.zeros_like(flat)
    pos = flat > 0.0
    if np.any(pos):
        out[pos] = _u_inv_positive(flat[pos])
    return _like(y, out)


def u_inv_log(log_y: ArrayLike) -> float | FloatArray:
    """u_inv(exp(log_y)) without forming exp(log_y).

    Above ln y = 700 the equation is solved as x + ln(x - 1) = ln y, which
    is exact up to an e^-x term that is far below double precision there.
    """
    flat = _as_flat(log_y)
    if np.any(np.isnan(flat)):
        raise ValueError("u_inv_log received NaN")
    out = np.zeros_like(flat)
    moderate = flat <= _LOG_OVERFLOW
    if np.any(moderate):
        out[moderate] = u_inv(np.exp(flat[moderate]))
    big = ~moderate
    if np.any(big):
        target = flat[big]
        x = target - np.log(target)
        for _ in range(_NEWTON_MAX_STEPS):
            step = (x + np.log(x - 1.0) - target) / (1.0 + 1.0 / (x - 1.0))
            x = x - step
            if np.all(np.abs(step) <= _SETTLE_RTOL * x):
                break
        else:
            raise NumericsError("u_inv_log: Newton iteration did not converge")
        out[big] = x
    return _like(log_y, out)


# ---------------------------------------------------------------------------
# w(x)
# ---------------------------------------------------------------------------


def _w(x: FloatArray) -> FloatArray:
    out = np.empty_like(x)
    d = x - 1.0
    small = np.abs(d) < _SERIES_CUTOFF
    ds = d[small]
    out[small] = ds * ds * np.polyval(_W_SERIES, ds)
    xl = x[~small]
    with np.errstate(over="ignore", invalid="ignore"):
        out[~small] = xl * np.log(xl) - xl + 1.0
    return out


def _w_prime(x: FloatArray) -> FloatArray:
    return np.log(x)


def w_eval(x: ArrayLike) -> float | FloatArray:
    """Evaluate w(x) = x (ln x - 1 + 1/x) for x >= 1."""
    flat = _as_flat(x)
    if np.any(~(flat >= 1.0)):
        raise ValueError("w_eval requires x >= 1")
    return _like(x, _w(flat))


def _w_inv_positive(y: FloatArray) -> FloatArray:
    # w(x) = y  <=>  (x/e) ln(x/e) = (y - 1) / e  <=>  x = e^(1 + W((y - 1)/e))
    seed = np.exp(1.0 + lambertw((y - 1.0) / math.e).real)
    tiny = y < 1e-4
    s = np.sqrt(2.0 * y[tiny])
    seed[tiny] = 1.0 + s + s * s / 6.0
    return _polish(_w, _w_prime, y, seed, lower=1.0, name="w_inv")


def w_inv(y: ArrayLike) -> float | FloatArray:
    """Inverse of w on [1, inf): returns x >= 1 with w(x) = y.

    ``w_inv(0)`` is exactly 1 without iteration.
    """
    flat = _as_flat(y)
    if np.any(~(flat >= 0.0)):
        raise ValueError("w_inv requires y >= 0")
    out = np.ones_like(flat)
    pos = flat > 0.0
    if np.any(pos):
        out[pos] = _w_inv_positive(flat[pos])
    return _like(y, out)


# ---------------------------------------------------------------------------
# Shared refinement
# ---------------------------------------------------------------------------


def _polish(
    func: Callable[[FloatArray], FloatArray],
    deriv: Callable[[FloatArray], FloatArray],
    target: FloatArray,
    seed: FloatArray,
    lower: float,
    name: str,
) -> FloatArray:
    """Safeguarded Newton on func(x) = target, elementwise, x >= lower."""
    if np.any(np.isinf(target)):
        raise NumericsError(f"{name}: infinite argument")
    x = np.maximum(seed, lower)
    active = np.ones(x.shape, dtype=bool)
    last = np.full(x.shape, np.inf)
    for _ in range(_NEWTON_MAX_STEPS):
        xa = x[active]
        slope = deriv(xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = (func(xa) - target[active]) / slope
        candidate = xa - step
        # Newton may leave the domain from the left of a convex function's root.
        outside = ~np.isfinite(candidate) | (candidate < lower)
        candidate[outside] = 0.5 * (xa[outside] + lower)
        x[active] = candidate
        moved = np.abs(candidate - xa)
        size = np.maximum(np.abs(candidate), 1e-300)
        idx = np.flatnonzero(active)
        stalled = (moved >= last[idx]) & (moved <= _NOISE_RTOL * size)
        settled = (moved <= _SETTLE_RTOL * size) | stalled
        last[idx] = moved
        active[idx[settled]] = False
        if not np.any(active):
            break

    residual = np.abs(func(x) - target)
    # rounding x itself moves func by up to |f'(x) x| eps
    floor = np.abs(deriv(x) * x) * _STEP_RTOL
    loose = ~(residual <= RESIDUAL_RTOL * target + floor)
    for k in np.flatnonzero(loose):
        logger.warning("%s: Newton missed tolerance at y=%r, using bisection", name, target[k])
        goal = float(target[k])
        x[k] = bisect_monotone(
            lambda v, goal=goal: float(func(np.array([v]))[0]) - goal,
            Bracket(lo=lower, hi=max(lower + 1.0, 2.0 * float(x[k])), lower_limit=lower),
        )
    return x
