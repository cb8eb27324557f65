"""
Spherical coverage CDFs of array-gain maps.

The CDF of a gain map is ``F(a) = (1/4pi) * sum of cell solid angles with
G <= a``: each direction counts in proportion to the area it covers on the
sphere, so polar directions carry little weight.

Percentiles use the CDF-value convention: ``percentile(cdf, 0.3)`` is the
gain that 30% of the sphere does not exceed, i.e. the gain achieved over
the best 70% of directions.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geometry import SphereGrid

DB_FLOOR = -400.0
DEFAULT_PERCENTILES = tuple(np.round(np.arange(0.05, 0.951, 0.05), 2))


def to_db(gain, floor: float = DB_FLOOR):
    """Linear power to dB with zeros (and anything below ``floor``) clamped to ``floor``."""
    g = np.asarray(gain, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(g > 0, 10.0 * np.log10(np.where(g > 0, g, 1.0)), floor)
    return np.maximum(out, floor)


def from_db(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True, eq=False)
class GainMap:
    """Per-direction total array gain (linear) on a grid, plus optional parts."""

    grid: SphereGrid
    total: np.ndarray
    gain_theta: Optional[np.ndarray] = None
    gain_phi: Optional[np.ndarray] = None
    best_theta: Optional[np.ndarray] = field(default=None, repr=False)
    best_phi: Optional[np.ndarray] = field(default=None, repr=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        total = np.asarray(self.total, dtype=float)
        if total.shape != (self.grid.size,):
            raise ValueError(f"gain map has {total.shape} values for {self.grid.size} grid points")
        if not np.all(np.isfinite(total)) or np.any(total < 0):
            raise ValueError("gains must be finite and nonnegative")
        object.__setattr__(self, "total", total)

    @property
    def total_db(self) -> np.ndarray:
        return to_db(self.total)

    def scaled(self, factor, **meta) -> "GainMap":
        """Copy with every gain multiplied by ``factor`` (scalar or per-direction)."""
        f = np.asarray(factor, dtype=float)
        part = (lambda g: None if g is None else g * f)
        return GainMap(self.grid, self.total * f, part(self.gain_theta), part(self.gain_phi),
                       self.best_theta, self.best_phi, {**self.meta, **meta})


@dataclass(frozen=True, eq=False)
class CoverageCdf:
    """Right-continuous step CDF over grid cells, sorted by gain."""

    gain_db: np.ndarray
    fraction: np.ndarray
    meta: dict = field(default_factory=dict)

    def __call__(self, alpha_db) -> np.ndarray:
        """``F(alpha)``: solid-angle fraction of the sphere with gain <= ``alpha_db``."""
        idx = np.searchsorted(self.gain_db, alpha_db, side="right")
        padded = np.concatenate([[0.0], self.fraction])
        return padded[idx]

    def steps(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct gain levels and the CDF value at each."""
        last = np.r_[self.gain_db[1:] != self.gain_db[:-1], True]
        return self.gain_db[last], self.fraction[last]

    def to_csv(self, path=None) -> str:
        """``gain_db,cdf_fraction`` rows at every distinct gain level."""
        g, f = self.steps()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gain_db", "cdf_fraction"])
        for a, b in zip(g, f):
            w.writerow([f"{a:.6f}", f"{b:.9f}"])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def spherical_cdf(gmap: GainMap, **meta) -> CoverageCdf:
    """Solid-angle weighted CDF of a gain map's total gain (in dB)."""
    db = gmap.total_db
    order = np.argsort(db, kind="stable")
    w = gmap.grid.weights[order]
    cum = np.cumsum(w)
    cum /= cum[-1]
    return CoverageCdf(db[order], cum, {**gmap.meta, **meta})


def percentile(cdf: CoverageCdf, p: float) -> float:
    """Smallest gain (dB) ``g`` with ``F(g) >= p``, for ``0 < p < 1``."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    # tolerate cumulative-sum rounding when p sits exactly on a step
    idx = int(np.searchsorted(cdf.fraction, p - 1e-12, side="left"))
    return float(cdf.gain_db[min(idx, cdf.gain_db.size - 1)])


@dataclass(frozen=True)
class Comparison:
    """Percentile table of several CDFs and their deltas relative to the first."""

    labels: tuple[str, ...]
    percentiles: np.ndarray
    values: np.ndarray  # (n_cdfs, n_percentiles), dB
    deltas: np.ndarray  # (n_cdfs - 1, n_percentiles), first minus other
    crossovers: tuple[tuple[float, ...], ...]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if len(self.labels) == 2:
            w.writerow(["percentile", "design_a_db", "design_b_db", "delta_db"])
        else:
            w.writerow(["percentile"] + [f"{lab}_db" for lab in self.labels]
                       + [f"delta_{lab}_db" for lab in self.labels[1:]])
        for k, p in enumerate(self.percentiles):
            row = [f"{100 * p:.0f}"] + [f"{v:.4f}" for v in self.values[:, k]]
            row += [f"{d:.4f}" for d in self.deltas[:, k]]
            w.writerow(row)
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _crossovers(percentiles: np.ndarray, delta: np.ndarray, tol: float) -> tuple[float, ...]:
    sign = np.where(np.abs(delta) <= tol, 0, np.sign(delta))
    out = []
    prev = 0
    for p, s in zip(percentiles, sign):
        if s != 0:
            if prev != 0 and s != prev:
                out.append(float(p))
            prev = s
    return tuple(out)


def compare(cdfs: Sequence[CoverageCdf], labels: Optional[Sequence[str]] = None,
            percentiles: Sequence[float] = DEFAULT_PERCENTILES, tol: float = 1e-9) -> Comparison:
    """Per-percentile gains and deltas (first CDF minus each other) in dB.

    A crossover is reported at the first percentile where the sign of a
    delta flips relative to the last nonzero delta.
    """
    if len(cdfs) < 2:
        raise ValueError("compare needs at least two CDFs")
    if labels is None:
        labels = [c.meta.get("label") or c.meta.get("design") or f"cdf{i}" for i, c in enumerate(cdfs)]
    if len(labels) != len(cdfs):
        raise ValueError("one label per CDF is required")
    ps = np.asarray(percentiles, dtype=float)
    values = np.array([[percentile(c, p) for p in ps] for c in cdfs])
    deltas = values[0] - values[1:]
    cross = tuple(_crossovers(ps, d, tol) for d in deltas)
    return Comparison(tuple(labels), ps, values, deltas, cross)
