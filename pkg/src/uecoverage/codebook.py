"""
RF beam codebooks with equal-amplitude, phase-quantized weights.

Beams are synthesised by conjugate steering: for a target direction the
weight of element ``i`` co-phases that element's response in the
subarray's feed polarization, ``w_i = exp(j arg E_i(target)) / sqrt(N)``,
and each phase is then snapped to the nearest level of a ``b``-bit phase
shifter. Targets are spread uniformly over each subarray's scan range.

Also provides the beam-management overhead arithmetic for initial
acquisition and UE-side refinement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .antenna import Subarray, UeDesign
from .geometry import Direction, unit_vector

DEFAULT_PHASE_BITS = 5


@dataclass(frozen=True, eq=False)
class Beam:
    weights: np.ndarray
    subarray_id: str
    feed: str
    boresight: Direction

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex).ravel()
        if w.size == 0:
            raise ValueError("beam has no weights")
        if abs(np.linalg.norm(w) - 1.0) > 1e-9:
            raise ValueError(f"beam weights must have unit norm, got {np.linalg.norm(w):.12g}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.weights.size

    def is_equal_amplitude(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(np.abs(self.weights) - 1 / math.sqrt(self.size)) <= tol))

    def on_phase_grid(self, bits: int, tol: float = 1e-9) -> bool:
        step = 2 * np.pi / 2**bits
        k = np.angle(self.weights) / step
        return bool(np.all(np.abs(k - np.round(k)) <= tol))


@dataclass(frozen=True, eq=False)
class Codebook:
    beams: tuple[Beam, ...]
    design: str = "custom"
    phase_bits: int = DEFAULT_PHASE_BITS
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.beams)

    def for_subarray(self, subarray_id: str) -> list[Beam]:
        return [b for b in self.beams if b.subarray_id == subarray_id]


def quantize_phase(weights, bits: int) -> np.ndarray:
    """Snap each phase to the nearest multiple of ``2 pi / 2**bits``.

    Magnitudes are kept; the result is rescaled to unit norm, which is a
    no-op for equal-amplitude input.
    """
    if int(bits) != bits or bits < 1:
        raise ValueError(f"phase resolution must be a positive integer, got {bits}")
    w = np.asarray(weights, dtype=complex)
    levels = 2**int(bits)
    step = 2 * np.pi / levels
    k = np.mod(np.round(np.angle(w) / step), levels)
    out = np.abs(w) * np.exp(1j * k * step)
    norm = np.linalg.norm(out)
    return out / norm if norm > 0 else out


def steering_beam(subarray: Subarray, target: Direction, phase_bits: int = DEFAULT_PHASE_BITS) -> Beam:
    """Equal-amplitude beam co-phasing ``subarray``'s feed responses towards ``target``."""
    e = subarray.response_at(target.theta, target.phi, subarray.feed)
    w = np.exp(1j * np.angle(e)) / math.sqrt(subarray.size)
    return Beam(quantize_phase(w, phase_bits), subarray.id, subarray.feed, target)


def scan_offsets(count: int, span: float) -> np.ndarray:
    """Centres of ``count`` equal segments of ``[-span, span]`` (degrees)."""
    k = np.arange(count)
    return -span + span * (2 * k + 1) / count


def beam_targets(subarray: Subarray, count: Optional[int] = None,
                 span: Optional[float] = None) -> list[Direction]:
    """Steering targets spread over the subarray's scan range.

    A linear subarray gets ``count`` targets in its scanning plane (the
    plane holding the boresight and the array axis). A planar subarray gets
    a square grid of ``sqrt(count)`` offsets per axis.
    """
    count = subarray.beams if count is None else count
    span = subarray.scan_span if span is None else span
    if count < 1:
        raise ValueError(f"subarray {subarray.id!r} has no beam plan")
    b = unit_vector(subarray.boresight)
    axes = [a - np.dot(a, b) * b for a in subarray.scan_axes]
    axes = [a / np.linalg.norm(a) for a in axes if np.linalg.norm(a) > 1e-9]
    if not axes:
        if count == 1:
            return [subarray.boresight]
        raise ValueError(f"subarray {subarray.id!r} cannot steer {count} distinct beams")
    if len(axes) == 1:
        offs = [(o,) for o in scan_offsets(count, span)]
    else:
        m = int(round(math.sqrt(count)))
        if m * m != count:
            raise ValueError(f"planar subarray {subarray.id!r} needs a square beam count, got {count}")
        per_axis = scan_offsets(m, span)
        offs = [(p, q) for p in per_axis for q in per_axis]
    targets = []
    for o in offs:
        v = b + sum(math.tan(math.radians(x)) * a for x, a in zip(o, axes[: len(o)]))
        targets.append(Direction.from_vector(v))
    return targets


def generate_design_codebook(design: UeDesign, phase_bits: int = DEFAULT_PHASE_BITS) -> Codebook:
    """Steering beams for every subarray of ``design`` according to its beam plan."""
    beams = []
    for sub in design.subarrays:
        if sub.beams < 1:
            raise ValueError(f"design {design.name!r}: subarray {sub.id!r} has no beam plan")
        beams.extend(steering_beam(sub, t, phase_bits) for t in beam_targets(sub))
    return Codebook(tuple(beams), design.name, phase_bits)


# ---------------------------------------------------------------------------
# Text format


def export_codebook(codebook: Codebook, path) -> None:
    """One line per beam: ``subarray_id,pol,boresight_theta,boresight_phi,re,im,...``."""
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# design={codebook.design} phase_bits={codebook.phase_bits}\n")
        for b in codebook.beams:
            pairs = ",".join(f"{w.real:.17g},{w.imag:.17g}" for w in b.weights)
            fh.write(f"{b.subarray_id},{b.feed},{b.boresight.theta:.17g},{b.boresight.phi:.17g},{pairs}\n")


def load_codebook(path) -> Codebook:
    design, bits = "custom", DEFAULT_PHASE_BITS
    beams = []
    for no, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                key, _, val = tok.partition("=")
                if key == "design":
                    design = val
                elif key == "phase_bits":
                    bits = int(val)
            continue
        parts = line.split(",")
        if len(parts) < 6 or (len(parts) - 4) % 2:
            raise ValueError(f"{path}:{no}: malformed beam line")
        try:
            vals = np.array([float(v) for v in parts[2:]])
        except ValueError:
            raise ValueError(f"{path}:{no}: non-numeric field") from None
        w = vals[2::2] + 1j * vals[3::2]
        beams.append(Beam(w, parts[0], parts[1], Direction(vals[0], vals[1])))
    return Codebook(tuple(beams), design, bits)


# ---------------------------------------------------------------------------
# Beam management overhead


def _subarray_count(design: Union[UeDesign, str]) -> int:
    if isinstance(design, UeDesign):
        return len(design.subarrays)
    from .designs import PRESETS

    if design not in PRESETS:
        raise ValueError(f"unknown design {design!r}")
    return sum(len(m["subarrays"]) for m in PRESETS[design]["modules"])


def acquisition_overhead(design: Union[UeDesign, str], ssb_period_ms: float = 20.0,
                         rf_chains: int = 2) -> float:
    """Initial acquisition time (ms) with one pseudo-omni beam per subarray-feed per SSB burst.

    Every subarray-feed instance is scanned once; ``rf_chains`` of them are
    trained in parallel per burst period.
    """
    if ssb_period_ms <= 0 or rf_chains <= 0:
        raise ValueError("SSB period and RF chain count must be positive")
    return ssb_period_ms * _subarray_count(design) / rf_chains


def refinement_overhead(narrow_beams: int = 4, mode: str = "csirs", *, symbols_per_beam: int = 4,
                        symbols_per_slot: int = 14, slot_ms: float = 0.25,
                        ssb_period_ms: float = 20.0, polarizations: int = 1) -> float:
    """Worst-case UE refinement time (ms) over ``narrow_beams`` candidate beams.

    ``csirs``: each beam needs ``symbols_per_beam`` CSI-RS symbols, packed
    into 14-symbol slots of 0.25 ms (60 kHz subcarrier spacing).
    ``ssb``: one beam per SSB burst period on the selected RF chain.
    """
    if narrow_beams < 1:
        raise ValueError("at least one narrow beam is required")
    if mode == "csirs":
        return math.ceil(symbols_per_beam * narrow_beams / symbols_per_slot) * slot_ms
    if mode == "ssb":
        return ssb_period_ms * narrow_beams / polarizations
    raise ValueError(f"unknown refinement mode {mode!r}")
