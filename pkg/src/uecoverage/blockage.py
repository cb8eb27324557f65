"""
Hand blockage regions and loss models.

A region is a (possibly azimuth-wrapping) rectangle in (phi, theta):
``phi in [phi1 - x1/2, phi1 + x1/2]`` and ``theta in [theta1 - y1/2,
theta1 + y1/2]``, closed on both ends. Inside it, ``model1`` applies a flat
30 dB loss and ``model2`` an independent Normal(15.3, 3.8) dB loss per
direction; ``model2-mean`` applies the flat 15.3 dB mean loss.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coverage import GainMap
from .geometry import Direction, SphereGrid, wrap_phi

# Boundary slack for membership tests, degrees.
EDGE_TOL = 1e-9

MODELS = ("model1", "model2", "model2-mean")


@dataclass(frozen=True)
class BlockageRegion:
    phi1: float
    x1: float
    theta1: float
    y1: float
    name: str = "custom"

    def __post_init__(self):
        if not 0 <= self.x1 <= 360:
            raise ValueError(f"azimuth extent must lie in [0, 360], got {self.x1}")
        if self.y1 < 0:
            raise ValueError(f"zenith extent must be nonnegative, got {self.y1}")

    @property
    def phi_bounds(self) -> tuple[float, float]:
        return self.phi1 - self.x1 / 2, self.phi1 + self.x1 / 2

    @property
    def theta_bounds(self) -> tuple[float, float]:
        return self.theta1 - self.y1 / 2, self.theta1 + self.y1 / 2

    def clamped_theta_bounds(self) -> tuple[float, float]:
        lo, hi = self.theta_bounds
        if lo < 0 or hi > 180:
            warnings.warn(f"region {self.name}: zenith bounds [{lo:g}, {hi:g}] clamped to [0, 180]",
                          stacklevel=3)
        return max(lo, 0.0), min(hi, 180.0)


PORTRAIT = BlockageRegion(260.0, 120.0, 100.0, 80.0, "portrait")
LANDSCAPE = BlockageRegion(40.0, 160.0, 110.0, 75.0, "landscape")
REGIONS = {"portrait": PORTRAIT, "landscape": LANDSCAPE}


def _phi_offset(region: BlockageRegion, phi) -> np.ndarray:
    """Azimuth measured from the region's lower edge, in [0, 360)."""
    return wrap_phi(np.asarray(phi, dtype=float) - region.phi_bounds[0])


def blocked_mask(region: BlockageRegion, theta, phi) -> np.ndarray:
    """Vectorised :func:`is_blocked` on arrays of angles (degrees)."""
    t = np.asarray(theta, dtype=float)
    lo, hi = region.theta_bounds
    in_theta = (t >= lo - EDGE_TOL) & (t <= hi + EDGE_TOL)
    if region.x1 >= 360:
        in_phi = np.ones_like(t, dtype=bool)
    else:
        off = _phi_offset(region, phi)
        in_phi = (off <= region.x1 + EDGE_TOL) | (off >= 360 - EDGE_TOL)
    return in_theta & in_phi


def is_blocked(d: Direction, region: BlockageRegion) -> bool:
    """Whether ``d`` falls inside the closed blockage rectangle (azimuth wraps)."""
    return bool(blocked_mask(region, d.theta, d.phi))


def region_indicator(region: BlockageRegion, theta, phi) -> np.ndarray:
    """Region indicator for quadrature: 1 inside, 0 outside, 1/2 on an edge.

    A cell centre lying exactly on a boundary gets half weight in that
    coordinate (1/4 at a corner), the midpoint-rule value for a step
    function. Integrating this against cell solid angles reproduces the
    closed-form region area on grids whose cell edges or centres fall on
    the region boundary.
    """
    t = np.asarray(theta, dtype=float)
    lo, hi = region.theta_bounds

    def edge_weight(x, a, b):
        inside = (x > a + EDGE_TOL) & (x < b - EDGE_TOL)
        edge = (np.abs(x - a) <= EDGE_TOL) | (np.abs(x - b) <= EDGE_TOL)
        return np.where(inside, 1.0, np.where(edge, 0.5, 0.0))

    wt = edge_weight(t, lo, hi)
    if region.x1 >= 360:
        wp = np.ones_like(wt)
    else:
        off = _phi_offset(region, phi)
        off = np.where(off >= 360 - EDGE_TOL, off - 360, off)
        wp = edge_weight(off, 0.0, region.x1)
    return wt * wp


def physical_angle_fraction(region: BlockageRegion) -> float:
    """Share (percent) of the 360 x 180 degree angle rectangle the region covers."""
    return region.x1 * region.y1 / (360.0 * 180.0) * 100.0


def cdf_loss_fraction(region: BlockageRegion) -> float:
    """Share (percent) of the sphere's solid angle covered by the region, in closed form."""
    lo, hi = region.clamped_theta_bounds()
    if hi <= lo:
        return 0.0
    solid = math.radians(region.x1) * (math.cos(math.radians(lo)) - math.cos(math.radians(hi)))
    return solid / (4 * math.pi) * 100.0


@dataclass(frozen=True)
class BlockageModel:
    variant: str = "model1"
    flat_loss_db: float = 30.0
    mean_db: float = 15.3
    std_db: float = 3.8

    def __post_init__(self):
        if self.variant not in MODELS:
            raise ValueError(f"unknown blockage model {self.variant!r}; choose from {MODELS}")

    @classmethod
    def parse(cls, value) -> "BlockageModel":
        if isinstance(value, BlockageModel):
            return value
        key = str(value).lower()
        return cls({"1": "model1", "2": "model2", "2-mean": "model2-mean"}.get(key, key))


def loss_draws(grid: SphereGrid, model: BlockageModel, seed: Optional[int]) -> np.ndarray:
    """Loss (dB) for every grid cell, ignoring the region.

    Model 2 draws come from a Philox counter-based generator keyed by
    ``seed``, one normal variate per cell index, so the loss of a cell does
    not depend on evaluation order or on which other cells are blocked.
    """
    if model.variant == "model1":
        return np.full(grid.size, model.flat_loss_db)
    if model.variant == "model2-mean":
        return np.full(grid.size, model.mean_db)
    if seed is None:
        raise ValueError("blockage model 2 requires a seed")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    return model.mean_db + model.std_db * rng.standard_normal(grid.size)


def apply_blockage(gmap: GainMap, region: BlockageRegion, model="model1",
                   seed: Optional[int] = None) -> GainMap:
    """Attenuate both polarizations of ``gmap`` inside ``region``.

    Model 2 draws are not clamped, so a rare negative draw raises the gain
    of its cell slightly.
    """
    model = BlockageModel.parse(model)
    grid = gmap.grid
    mask = blocked_mask(region, grid.theta, grid.phi)
    loss_db = np.where(mask, loss_draws(grid, model, seed), 0.0)
    factor = 10.0 ** (-loss_db / 10.0)
    return gmap.scaled(factor, blockage=region.name, model=model.variant, seed=seed)
