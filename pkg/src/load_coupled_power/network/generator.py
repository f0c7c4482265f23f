"""Seeded scenario generation on a hexagonal sector layout.

Link gain (dB) = antenna pattern - path loss + shadow fading, with

    path loss  PL = 36.7 log10(d_m) + 22.7 + 26 log10(f_GHz),  d >= 10 m
    antenna    A(theta) = G_bs - min(12 (theta / theta_3dB)^2, A_fb)

Users are dropped uniformly in a disc covering the layout and attach to the
BS with the highest gain.
"""

from __future__ import annotations

import logging
import math
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from ..errors import ScenarioError
from ..utils import db_to_linear, dbm_per_hz_to_watts_per_hz
from .scenario import NetworkScenario

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


class ScenarioGenConfig(BaseModel):
    """Physical layout and traffic parameters of a generated scenario."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    site_count: int = Field(default=5, ge=1)
    sectors_per_site: int = Field(default=3, ge=1)
    inter_site_distance_m: float = Field(default=200.0, gt=0)
    boresight_gain_dbi: float = Field(default=14.0, gt=0)
    beamwidth_3db_deg: float = Field(default=70.0, gt=0)
    front_to_back_db: float = Field(default=20.0, gt=0)
    path_loss_slope: float = Field(default=36.7, gt=0)
    path_loss_intercept: float = Field(default=22.7, gt=0)
    path_loss_frequency_coeff: float = Field(default=26.0, gt=0)
    min_distance_m: float = Field(default=10.0, gt=0)
    shadow_std_db: float = Field(default=4.0, ge=0)
    carrier_ghz: float = Field(default=2.0, gt=0)
    users_per_cell: int = Field(default=30, ge=1)
    seed: int = Field(default=0, ge=0)
    demand_bps: float = Field(default=1e6, gt=0)
    power_limit_w: float = Field(default=10.0, gt=0)
    noise_density_dbm_hz: float = -174.0
    bandwidth_hz: float = Field(default=18e6, gt=0)
    tie_break: Literal["lowest-index", "random"] = "lowest-index"
    max_retries: int = Field(default=100, ge=1)

    @property
    def cell_count(self) -> int:
        return self.site_count * self.sectors_per_site


def hex_sites(count: int, spacing: float) -> FloatArray:
    """Centres of the first ``count`` sites of a hex grid, ring by ring.

    Within a ring sites are ordered by angle from the +x axis.
    """
    rings = 0
    while 1 + 3 * rings * (rings + 1) < count:
        rings += 1
    cells: list[tuple[int, float, float, float]] = []
    for q in range(-rings, rings + 1):
        for r in range(-rings, rings + 1):
            ring = max(abs(q), abs(r), abs(q + r))
            if ring > rings:
                continue
            x = spacing * (q + r / 2.0)
            y = spacing * (math.sqrt(3.0) / 2.0) * r
            angle = math.atan2(y, x) % (2.0 * math.pi)
            cells.append((ring, round(angle, 12), x, y))
    cells.sort()
    return np.array([(x, y) for _, _, x, y in cells[:count]], dtype=float)


def path_loss_db(distance_m: FloatArray, cfg: ScenarioGenConfig) -> FloatArray:
    d = np.maximum(distance_m, cfg.min_distance_m)
    return (
        cfg.path_loss_slope * np.log10(d)
        + cfg.path_loss_intercept
        + cfg.path_loss_frequency_coeff * math.log10(cfg.carrier_ghz)
    )


def antenna_gain_db(offset_deg: FloatArray, cfg: ScenarioGenConfig) -> FloatArray:
    """Horizontal sector pattern; ``offset_deg`` is the angle off boresight."""
    if cfg.sectors_per_site == 1:
        return np.full(np.shape(offset_deg), cfg.boresight_gain_dbi)
    theta = (np.asarray(offset_deg) + 180.0) % 360.0 - 180.0
    attenuation = np.minimum(12.0 * (theta / cfg.beamwidth_3db_deg) ** 2, cfg.front_to_back_db)
    return cfg.boresight_gain_dbi - attenuation


def _drop_users(
    rng: np.random.Generator, count: int, radius: float
) -> FloatArray:
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, count))
    phi = rng.uniform(0.0, 2.0 * math.pi, count)
    return np.column_stack((r * np.cos(phi), r * np.sin(phi)))


def _link_gains_db(
    rng: np.random.Generator,
    sites: FloatArray,
    users: FloatArray,
    cfg: ScenarioGenConfig,
) -> FloatArray:
    sectors = cfg.sectors_per_site
    bs_pos = np.repeat(sites, sectors, axis=0)
    boresight = np.tile(30.0 + 360.0 / sectors * np.arange(sectors), len(sites))
    delta = users[None, :, :] - bs_pos[:, None, :]
    distance = np.hypot(delta[..., 0], delta[..., 1])
    bearing = np.degrees(np.arctan2(delta[..., 1], delta[..., 0]))
    gain_db = antenna_gain_db(bearing - boresight[:, None], cfg) - path_loss_db(distance, cfg)
    if cfg.shadow_std_db > 0:
        gain_db = gain_db + rng.normal(0.0, cfg.shadow_std_db, gain_db.shape)
    return gain_db


def _associate(
    rng: np.random.Generator, gains: FloatArray, tie_break: str
) -> NDArray[np.int64]:
    if tie_break == "lowest-index":
        return np.argmax(gains, axis=0).astype(np.int64)
    best = gains.max(axis=0)
    serving = np.empty(gains.shape[1], dtype=np.int64)
    for j in range(gains.shape[1]):
        candidates = np.flatnonzero(gains[:, j] == best[j])
        serving[j] = candidates[0] if len(candidates) == 1 else rng.choice(candidates)
    return serving


def generate_scenario(cfg: ScenarioGenConfig) -> NetworkScenario:
    """Draw a scenario; the seed fixes it completely.

    Raises:
        ScenarioError: Some cell stayed empty after ``cfg.max_retries`` drops.
    """
    rng = np.random.default_rng(cfg.seed)
    sites = hex_sites(cfg.site_count, cfg.inter_site_distance_m)
    radius = float(np.hypot(sites[:, 0], sites[:, 1]).max()) + cfg.inter_site_distance_m / math.sqrt(3.0)
    n_cells = cfg.cell_count
    n_users = n_cells * cfg.users_per_cell

    for attempt in range(1, cfg.max_retries + 1):
        users = _drop_users(rng, n_users, radius)
        gains = db_to_linear(_link_gains_db(rng, sites, users, cfg))
        serving = _associate(rng, gains, cfg.tie_break)
        counts = np.bincount(serving, minlength=n_cells)
        if np.all(counts > 0):
            break
        logger.debug("drop %d left cells %s empty, redrawing", attempt, np.flatnonzero(counts == 0))
    else:
        raise ScenarioError(
            f"some cell received no users after {cfg.max_retries} drops; "
            "increase users_per_cell or change the layout"
        )

    order = np.argsort(serving, kind="stable")
    scenario = NetworkScenario(
        gains=gains[:, order],
        serving=serving[order],
        demands=np.full(n_users, cfg.demand_bps),
        power_limits=np.full(n_cells, cfg.power_limit_w),
        noise_density=dbm_per_hz_to_watts_per_hz(cfg.noise_density_dbm_hz),
        bandwidth=cfg.bandwidth_hz,
    )
    logger.info(
        "generated scenario: %d cells, %d users (seed=%d, drops=%d)",
        n_cells, n_users, cfg.seed, attempt,
    )
    return scenario
