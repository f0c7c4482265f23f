"""Problem instances and allocations.

Users are indexed globally (0..U-1) and grouped contiguously by serving
cell, so cell i owns the slice ``scenario.users_of(i)``. Power quantities
are spectral densities in W/Hz; ``power_limits`` are watts and become the
density cap ``q_max = power_limits / bandwidth``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import ScenarioError

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]


def _frozen(values: ArrayLike, dtype: type = float) -> NDArray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class NetworkScenario:
    """Multi-cell downlink instance.

    Attributes:
        gains: Linear power gains, shape (N, U); ``gains[k, j]`` is BS k to user j.
        serving: Serving cell of every user, shape (U,), non-decreasing.
        demands: Rate demands in bits/s, shape (U,).
        power_limits: Average transmit power cap per BS in W, shape (N,).
        noise_density: Noise power spectral density in W/Hz.
        bandwidth: System bandwidth in Hz.
    """

    gains: FloatArray
    serving: IntArray
    demands: FloatArray
    power_limits: FloatArray
    noise_density: float
    bandwidth: float

    def __post_init__(self) -> None:
        gains = _frozen(self.gains)
        serving = _frozen(self.serving, dtype=np.int64)
        demands = _frozen(self.demands)
        limits = _frozen(self.power_limits)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "serving", serving)
        object.__setattr__(self, "demands", demands)
        object.__setattr__(self, "power_limits", limits)
        object.__setattr__(self, "noise_density", float(self.noise_density))
        object.__setattr__(self, "bandwidth", float(self.bandwidth))

        if gains.ndim != 2:
            raise ScenarioError(f"gains must be 2-D (cells x users), got shape {gains.shape}")
        n_cells, n_users = gains.shape
        if n_cells < 1 or n_users < 1:
            raise ScenarioError("scenario needs at least one cell and one user")
        if serving.shape != (n_users,) or demands.shape != (n_users,):
            raise ScenarioError("serving and demands must have one entry per user")
        if limits.shape != (n_cells,):
            raise ScenarioError("power_limits must have one entry per cell")
        if not np.all(np.isfinite(gains)) or np.any(gains <= 0.0):
            raise ScenarioError("all gains must be finite and > 0")
        if not np.all(np.isfinite(demands)) or np.any(demands <= 0.0):
            raise ScenarioError("every demand must be finite and > 0")
        if not np.all(np.isfinite(limits)) or np.any(limits <= 0.0):
            raise ScenarioError("power limits must be finite and > 0")
        if not (np.isfinite(self.noise_density) and self.noise_density > 0.0):
            raise ScenarioError("noise_density must be > 0")
        if not (np.isfinite(self.bandwidth) and self.bandwidth > 0.0):
            raise ScenarioError("bandwidth must be > 0")
        if np.any(serving < 0) or np.any(serving >= n_cells):
            raise ScenarioError("serving index out of range")
        if np.any(np.diff(serving) < 0):
            raise ScenarioError("users must be grouped contiguously by serving cell")
        counts = np.bincount(serving, minlength=n_cells)
        if np.any(counts == 0):
            empty = np.flatnonzero(counts == 0).tolist()
            raise ScenarioError(f"cells without users: {empty}")

    # -- shape -------------------------------------------------------------

    @property
    def cell_count(self) -> int:
        return int(self.gains.shape[0])

    @property
    def user_count(self) -> int:
        return int(self.gains.shape[1])

    @cached_property
    def users_per_cell(self) -> IntArray:
        return _frozen(np.bincount(self.serving, minlength=self.cell_count), dtype=np.int64)

    @cached_property
    def _offsets(self) -> IntArray:
        return np.concatenate(([0], np.cumsum(self.users_per_cell)))

    def users_of(self, i: int) -> slice:
        """Global user indices served by cell ``i``."""
        return slice(int(self._offsets[i]), int(self._offsets[i + 1]))

    # -- derived channel quantities ----------------------------------------

    @cached_property
    def serving_gains(self) -> FloatArray:
        """g[serving(j), j] for every user."""
        return _frozen(self.gains[self.serving, np.arange(self.user_count)])

    @cached_property
    def cross_gains(self) -> FloatArray:
        """Gains with every serving link zeroed, shape (N, U)."""
        cross = np.array(self.gains, copy=True)
        cross[self.serving, np.arange(self.user_count)] = 0.0
        cross.setflags(write=False)
        return cross

    @property
    def q_max(self) -> FloatArray:
        """Per-cell power density cap P_max / B in W/Hz."""
        return self.power_limits / self.bandwidth

    def interference_density(self, q: ArrayLike) -> FloatArray:
        """Interference-plus-noise density at every user for cell powers ``q``."""
        return self.cross_gains.T @ np.asarray(q, dtype=float) + self.noise_density

    # -- derivation --------------------------------------------------------

    def with_demands(self, demands: ArrayLike) -> NetworkScenario:
        return replace(self, demands=np.broadcast_to(np.asarray(demands, float), (self.user_count,)))

    def with_uniform_demand(self, demand: float) -> NetworkScenario:
        """Same channel, every user demanding ``demand`` bits/s."""
        return self.with_demands(np.full(self.user_count, float(demand)))

    def with_power_limits(self, power_limits: ArrayLike) -> NetworkScenario:
        """Same channel with new per-cell caps in W (scalar broadcasts)."""
        return replace(
            self,
            power_limits=np.broadcast_to(np.asarray(power_limits, float), (self.cell_count,)),
        )

    def cell(self, i: int) -> NetworkScenario:
        """Cell ``i`` in isolation (its users, no foreign cells)."""
        users = self.users_of(i)
        return NetworkScenario(
            gains=self.gains[i : i + 1, users],
            serving=np.zeros(users.stop - users.start, dtype=np.int64),
            demands=self.demands[users],
            power_limits=self.power_limits[i : i + 1],
            noise_density=self.noise_density,
            bandwidth=self.bandwidth,
        )


@dataclass(frozen=True, eq=False)
class CellPowerVector:
    """Average transmit power density q_i of every BS in W/Hz."""

    values: FloatArray

    def __post_init__(self) -> None:
        values = _frozen(self.values)
        if values.ndim != 1:
            raise ValueError("cell power vector must be 1-D")
        if np.any(~(values >= 0.0)):
            raise ValueError("cell powers must be >= 0")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __getitem__(self, i: int) -> float:
        return float(self.values[i])

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def others(self, i: int) -> FloatArray:
        """q with entry ``i`` zeroed (the interferers seen by cell ``i``'s users)."""
        out = np.array(self.values, copy=True)
        out[i] = 0.0
        return out


@dataclass(frozen=True, eq=False)
class Allocation:
    """Loads, transformed powers and rates of every user.

    ``transformed_power`` (p-bar = m * p, W/Hz) is the canonical power
    variable; the power density p is derived and defined 0 where m = 0.
    The load cap is not enforced here so that violations can be reported
    by :func:`~load_coupled_power.network.model.validate_allocation`.
    """

    serving: IntArray
    cell_count: int
    loads: FloatArray
    transformed_power: FloatArray
    rates: FloatArray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        serving = _frozen(self.serving, dtype=np.int64)
        loads = _frozen(self.loads)
        power = _frozen(self.transformed_power)
        rates = _frozen(self.rates) if np.size(self.rates) else _frozen(np.zeros(loads.shape))
        object.__setattr__(self, "serving", serving)
        object.__setattr__(self, "loads", loads)
        object.__setattr__(self, "transformed_power", power)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "cell_count", int(self.cell_count))

        if not (serving.shape == loads.shape == power.shape == rates.shape) or loads.ndim != 1:
            raise ValueError("serving, loads, transformed_power and rates must share one 1-D shape")
        if np.any(~np.isfinite(loads)) or np.any(~np.isfinite(power)):
            raise ValueError("allocation contains non-finite values")
        if np.any(loads < 0.0):
            raise ValueError("loads must be >= 0")
        if np.any(power < 0.0):
            raise ValueError("transformed powers must be >= 0")

    @classmethod
    def zeros(cls, scenario: NetworkScenario) -> Allocation:
        n = scenario.user_count
        return cls(scenario.serving, scenario.cell_count, np.zeros(n), np.zeros(n), np.zeros(n))

    @property
    def power_density(self) -> FloatArray:
        """p = p-bar / m, 0 where m = 0."""
        out = np.zeros_like(self.loads)
        active = self.loads > 0.0
        out[active] = self.transformed_power[active] / self.loads[active]
        return out

    def cell_loads(self) -> FloatArray:
        return np.bincount(self.serving, weights=self.loads, minlength=self.cell_count)

    def cell_powers(self) -> CellPowerVector:
        return CellPowerVector(
            np.bincount(self.serving, weights=self.transformed_power, minlength=self.cell_count)
        )

    @property
    def sum_rate(self) -> float:
        return float(self.rates.sum())

    def with_rates(self, rates: ArrayLike) -> Allocation:
        return replace(self, rates=np.asarray(rates, dtype=float))

    def with_cell(
        self, users: slice, loads: ArrayLike, transformed_power: ArrayLike, rates: ArrayLike
    ) -> Allocation:
        """Copy with the entries of one cell's users replaced."""
        m = np.array(self.loads, copy=True)
        p = np.array(self.transformed_power, copy=True)
        r = np.array(self.rates, copy=True)
        m[users], p[users], r[users] = loads, transformed_power, rates
        return replace(self, loads=m, transformed_power=p, rates=r)
