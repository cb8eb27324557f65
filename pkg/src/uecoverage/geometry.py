"""
Spherical coordinates, direction grids and solid-angle quadrature.

Angles are in degrees at every public boundary: ``theta`` is the zenith
angle in [0, 180] and ``phi`` the azimuth in [0, 360).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Union

import numpy as np

FOUR_PI = 4.0 * np.pi

# Relative slack when checking that a step divides 180/360.
_STEP_TOL = 1e-9


class GridError(ValueError):
    """Raised for an invalid grid configuration."""


def wrap_phi(phi):
    """Wrap azimuth values into [0, 360)."""
    out = np.mod(np.asarray(phi, dtype=float), 360.0)
    # np.mod(-1e-17, 360) returns 360.0
    out = np.where(out >= 360.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Direction:
    """A point on the unit sphere, ``theta`` zenith and ``phi`` azimuth in degrees."""

    theta: float
    phi: float

    def __post_init__(self):
        theta = float(self.theta)
        if not np.isfinite(theta) or theta < 0.0 or theta > 180.0:
            raise ValueError(f"theta must lie in [0, 180], got {self.theta}")
        if not np.isfinite(self.phi):
            raise ValueError(f"phi must be finite, got {self.phi}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", wrap_phi(float(self.phi)))

    @classmethod
    def from_vector(cls, v) -> "Direction":
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ValueError("zero vector has no direction")
        x, y, z = v / norm
        # atan2 keeps precision near the poles, where arccos is ill-conditioned
        theta = np.degrees(np.arctan2(np.hypot(x, y), z))
        phi = np.degrees(np.arctan2(y, x)) if (x or y) else 0.0
        return cls(theta, phi)


def unit_vector(d: Direction) -> np.ndarray:
    """Cartesian unit vector ``[sin t cos p, sin t sin p, cos t]`` of a direction."""
    return unit_vectors(d.theta, d.phi)


def unit_vectors(theta, phi) -> np.ndarray:
    """Vectorised :func:`unit_vector`; output has shape ``theta.shape + (3,)``."""
    t = np.radians(np.asarray(theta, dtype=float))
    p = np.radians(np.asarray(phi, dtype=float))
    st = np.sin(t)
    return np.stack([st * np.cos(p), st * np.sin(p), np.cos(t)], axis=-1)


def _count(span: float, step: float, name: str) -> int:
    if not np.isfinite(step) or step <= 0:
        raise GridError(f"{name} must be positive, got {step}")
    n = span / step
    k = int(round(n))
    if k < 1 or abs(n - k) > _STEP_TOL * max(1.0, n):
        raise GridError(f"{name}={step} does not divide {span:g} degrees")
    return k


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Uniform cell-centred (theta, phi) grid over the full sphere.

    Points are stored theta-major: index ``i * n_phi + j`` is the cell
    centred at ``((i + 1/2) theta_step, (j + 1/2) phi_step)``.

    Each weight is the exact solid angle of its cell,
    ``phi_step * (cos(theta_lo) - cos(theta_hi))``, which equals
    ``sin(theta) * theta_step * phi_step * sinc(theta_step / 2)`` with all
    angles in radians. The weights therefore sum to 4*pi to rounding error
    for every grid.
    """

    theta_step: float
    phi_step: float
    n_theta: int = field(init=False)
    n_phi: int = field(init=False)
    theta: np.ndarray = field(init=False, repr=False)
    phi: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n_theta = _count(180.0, self.theta_step, "theta_step")
        n_phi = _count(360.0, self.phi_step, "phi_step")
        theta_c = (np.arange(n_theta) + 0.5) * self.theta_step
        phi_c = (np.arange(n_phi) + 0.5) * self.phi_step

        edges = np.radians(np.arange(n_theta + 1) * self.theta_step)
        edges[-1] = np.pi
        band = np.cos(edges[:-1]) - np.cos(edges[1:])
        cell = band * np.radians(self.phi_step)

        theta = np.repeat(theta_c, n_phi)
        phi = np.tile(phi_c, n_theta)
        weights = np.repeat(cell, n_phi)
        for arr in (theta, phi, weights):
            arr.setflags(write=False)
        object.__setattr__(self, "n_theta", n_theta)
        object.__setattr__(self, "n_phi", n_phi)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return self.n_theta * self.n_phi

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_theta, self.n_phi

    @property
    def points(self) -> list[Direction]:
        return list(self.iter_points())

    def iter_points(self) -> Iterator[Direction]:
        for t, p in zip(self.theta, self.phi):
            yield Direction(t, p)

    def unit_vectors(self) -> np.ndarray:
        return unit_vectors(self.theta, self.phi)

    def index_of(self, theta, phi):
        """Index of the cell containing each (theta, phi); vectorised."""
        t = np.asarray(theta, dtype=float)
        p = wrap_phi(np.asarray(phi, dtype=float))
        i = np.clip(np.floor(t / self.theta_step).astype(int), 0, self.n_theta - 1)
        j = np.clip(np.floor(p / self.phi_step).astype(int), 0, self.n_phi - 1)
        return i * self.n_phi + j

    def __eq__(self, other):
        if not isinstance(other, SphereGrid):
            return NotImplemented
        return self.shape == other.shape

    def __hash__(self):
        return hash(self.shape)


def make_grid(theta_step: float = 1.0, phi_step: float = 1.0) -> SphereGrid:
    """Build a :class:`SphereGrid`; steps in degrees must divide 180 and 360."""
    return SphereGrid(float(theta_step), float(phi_step))


Field = Union[np.ndarray, Callable[[np.ndarray, np.ndarray], np.ndarray], float]


def sample(grid: SphereGrid, f: Field) -> np.ndarray:
    """Evaluate ``f`` on the grid; ``f`` may be an array, a scalar or ``f(theta, phi)``."""
    if callable(f):
        values = np.asarray(f(grid.theta, grid.phi), dtype=float)
    else:
        values = np.asarray(f, dtype=float)
    values = np.broadcast_to(values, (grid.size,)) if values.ndim == 0 else values
    if values.shape != (grid.size,):
        raise ValueError(f"field has shape {values.shape}, grid has {grid.size} points")
    return values


def integrate(grid: SphereGrid, f: Field) -> float:
    """Solid-angle weighted sum ``sum f(p) w(p)`` over all grid cells."""
    return float(np.dot(sample(grid, f), grid.weights))
