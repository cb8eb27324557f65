"""
Antenna element responses and the UE design hierarchy.

An element is described by its complex far-field response in the Theta
and Phi polarizations, sampled on a :class:`~uecoverage.geometry.SphereGrid`.
Elements are grouped into subarrays (driven coherently through one feed),
subarrays into modules, and modules into a UE design.

Measured or full-wave simulated patterns are not shipped with this package.
The built-in designs use parametric cosine-power patterns instead, see
:func:`synthetic_element_pattern`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from .geometry import Direction, SphereGrid, make_grid, unit_vector, unit_vectors

Kind = Literal["patch", "dipole", "ideal"]
Pol = Literal["theta", "phi"]
POLS: tuple[Pol, Pol] = ("theta", "phi")

# Back-lobe floor of the synthetic patterns, relative to peak (-20 dB).
BACKLOBE_FLOOR = 0.01

ResponseModel = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


class PatternFormatError(ValueError):
    """Malformed pattern-grid file."""


@dataclass(frozen=True)
class ComplexGainPair:
    """Complex far-field amplitudes of one element in one direction."""

    e_theta: complex
    e_phi: complex

    def __post_init__(self):
        if not (np.isfinite(self.e_theta) and np.isfinite(self.e_phi)):
            raise ValueError("response components must be finite")

    @property
    def gain(self) -> float:
        """Total realized gain, linear."""
        return abs(self.e_theta) ** 2 + abs(self.e_phi) ** 2


@dataclass(frozen=True, eq=False)
class ElementPattern:
    """Complex response of one element sampled on every cell of ``grid``.

    ``model``, when present, evaluates the same response analytically at
    arbitrary directions; otherwise off-grid lookups use the nearest cell.
    """

    grid: SphereGrid
    e_theta: np.ndarray
    e_phi: np.ndarray
    model: Optional[ResponseModel] = field(default=None, repr=False)

    def __post_init__(self):
        et = np.asarray(self.e_theta, dtype=complex)
        ep = np.asarray(self.e_phi, dtype=complex)
        if et.shape != (self.grid.size,) or ep.shape != (self.grid.size,):
            raise ValueError("one sample per grid point is required")
        if not (np.all(np.isfinite(et)) and np.all(np.isfinite(ep))):
            raise ValueError("pattern samples must be finite")
        et.setflags(write=False)
        ep.setflags(write=False)
        object.__setattr__(self, "e_theta", et)
        object.__setattr__(self, "e_phi", ep)

    def component(self, pol: Pol) -> np.ndarray:
        return self.e_theta if pol == "theta" else self.e_phi

    @property
    def total_gain(self) -> np.ndarray:
        return np.abs(self.e_theta) ** 2 + np.abs(self.e_phi) ** 2

    @property
    def peak_gain_dbi(self) -> float:
        return float(10 * np.log10(self.total_gain.max()))

    @property
    def peak_directivity_dbi(self) -> float:
        """Peak of the pattern relative to its own sphere-average power."""
        g = self.total_gain
        mean = np.dot(g, self.grid.weights) / (4 * np.pi)
        return float(10 * np.log10(g.max() / mean))

    def at(self, theta, phi) -> tuple[np.ndarray, np.ndarray]:
        """Response at arbitrary directions (degrees)."""
        if self.model is not None:
            return self.model(np.asarray(theta, float), np.asarray(phi, float))
        idx = self.grid.index_of(theta, phi)
        return self.e_theta[idx], self.e_phi[idx]

    def sample(self, d: Direction) -> ComplexGainPair:
        et, ep = self.at(d.theta, d.phi)
        return ComplexGainPair(complex(et), complex(ep))


def _on_grid(grid: SphereGrid, model: ResponseModel) -> ElementPattern:
    et, ep = model(grid.theta, grid.phi)
    return ElementPattern(grid, et, ep, model)


# ---------------------------------------------------------------------------
# Ideal arrays


def _array_index(dims: Sequence[int], n: int) -> tuple[int, int, int]:
    nx, ny, nz = (int(v) for v in dims)
    total = nx * ny * nz
    if min(nx, ny, nz) < 1:
        raise ValueError(f"array dimensions must be positive, got {dims}")
    if not 1 <= n <= total:
        raise IndexError(f"element index {n} outside 1..{total}")
    k = n - 1
    return k % nx, (k // nx) % ny, k // (nx * ny)


def element_positions(dims: Sequence[int]) -> np.ndarray:
    """Half-wavelength lattice positions (in wavelengths), shape ``(N, 3)``.

    Element ``n`` (1-based) sits at ``(n_x, n_y, n_z) / 2`` with
    ``n - 1 = n_x + n_y N_x + n_z N_x N_y``.
    """
    total = int(np.prod(dims))
    return 0.5 * np.array([_array_index(dims, n) for n in range(1, total + 1)], dtype=float)


def ideal_array_response(dims: Sequence[int], n: int, d: Direction) -> ComplexGainPair:
    """Response of the ``n``-th (1-based) element of an ideal half-wavelength array.

    Both polarizations carry ``exp(j pi (n_x u_x + n_y u_y + n_z u_z)) / sqrt(N)``
    where ``u`` is the unit vector of ``d``.
    """
    idx = np.array(_array_index(dims, n), dtype=float)
    total = int(np.prod(dims))
    v = np.exp(1j * np.pi * np.dot(idx, unit_vector(d))) / math.sqrt(total)
    return ComplexGainPair(v, v)


def _ideal_model(dims: Sequence[int], n: int) -> ResponseModel:
    pos = 2.0 * element_positions(dims)[n - 1]
    scale = 1.0 / math.sqrt(int(np.prod(dims)))

    def model(theta, phi):
        v = scale * np.exp(1j * np.pi * (unit_vectors(theta, phi) @ pos))
        return v, v.copy()

    return model


# ---------------------------------------------------------------------------
# Synthetic element patterns


def cosine_exponent(beamwidth: float) -> float:
    """Exponent ``q`` such that ``cos(beamwidth/2) ** q == 1/2``."""
    if not 0.0 < beamwidth < 180.0:
        raise ValueError(f"beamwidth must lie in (0, 180) degrees, got {beamwidth}")
    return math.log(0.5) / math.log(math.cos(math.radians(beamwidth / 2)))


def matched_beamwidth(peak_gain_dbi: float) -> float:
    """Half-power beamwidth of a cos^q lobe whose directivity equals ``peak_gain_dbi``.

    A forward-hemisphere ``cos^q`` lobe has directivity ``2 (q + 1)``.
    """
    q = 10 ** (peak_gain_dbi / 10) / 2 - 1
    if q <= 0:
        raise ValueError(f"peak gain {peak_gain_dbi} dBi is too low for a matched cos^q lobe")
    return 2 * math.degrees(math.acos(0.5 ** (1 / q)))


def synthetic_model(
    boresight: Direction,
    peak_gain_dbi: float,
    beamwidth: float,
    feed: Pol = "theta",
    position=(0.0, 0.0, 0.0),
) -> ResponseModel:
    q = cosine_exponent(beamwidth)
    peak = 10 ** (peak_gain_dbi / 10)
    axis = unit_vector(boresight)
    pos = np.asarray(position, dtype=float)

    def model(theta, phi):
        u = unit_vectors(theta, phi)
        c = np.clip(u @ axis, 0.0, 1.0)
        gain = peak * np.maximum(c**q, BACKLOBE_FLOOR)
        amp = np.sqrt(gain) * np.exp(2j * np.pi * (u @ pos))
        zero = np.zeros_like(amp)
        return (amp, zero) if feed == "theta" else (zero, amp)

    return model


def synthetic_element_pattern(
    kind: Kind,
    boresight: Direction,
    peak_gain: float,
    beamwidth: Optional[float],
    grid: SphereGrid,
    feed: Pol = "theta",
    position=(0.0, 0.0, 0.0),
) -> ElementPattern:
    """Cosine-power stand-in for a patch or dipole element.

    Total gain is ``peak * cos(psi) ** q`` with ``psi`` the angle from
    ``boresight``, floored at -20 dB relative to peak (which also covers the
    back hemisphere). ``q`` is chosen so the half-power beamwidth equals
    ``beamwidth``; pass ``None`` to derive the beamwidth from ``peak_gain``
    via :func:`matched_beamwidth`. The fed polarization carries the whole
    pattern and cross-polarization is zero. ``position`` is the phase centre
    in wavelengths.
    """
    if kind not in ("patch", "dipole"):
        raise ValueError(f"unknown element kind {kind!r}")
    if peak_gain <= 0:
        raise ValueError("peak gain must be positive (dBi)")
    if feed not in POLS:
        raise ValueError(f"feed must be 'theta' or 'phi', got {feed!r}")
    if beamwidth is None:
        beamwidth = matched_beamwidth(peak_gain)
    if beamwidth >= 180.0 or beamwidth <= 0:
        raise ValueError(f"beamwidth must lie in (0, 180) degrees, got {beamwidth}")
    return _on_grid(grid, synthetic_model(boresight, peak_gain, beamwidth, feed, position))


# ---------------------------------------------------------------------------
# Pattern files


def export_pattern_file(pattern: ElementPattern, path) -> None:
    """Write ``pattern`` in the line-oriented pattern-grid format."""
    g = pattern.grid
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{g.theta_step:.17g},{g.phi_step:.17g}\n")
        for t, p, et, ep in zip(g.theta, g.phi, pattern.e_theta, pattern.e_phi):
            fh.write(
                f"{t:.17g},{p:.17g},{et.real:.17g},{et.imag:.17g},{ep.real:.17g},{ep.imag:.17g}\n"
            )


def load_pattern_file(path) -> ElementPattern:
    """Read a pattern-grid file.

    The header line is ``theta_step,phi_step``; each following line is
    ``theta_deg,phi_deg,re_etheta,im_etheta,re_ephi,im_ephi`` for one cell
    centre, theta-major. Blank lines and ``#`` comments are ignored.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    rows = [(no, ln.strip()) for no, ln in enumerate(lines, 1)]
    rows = [(no, ln) for no, ln in rows if ln and not ln.startswith("#")]
    if not rows:
        raise PatternFormatError(f"{path}: empty pattern file")

    head_no, head = rows[0]
    try:
        theta_step, phi_step = (float(v) for v in head.split(","))
        grid = make_grid(theta_step, phi_step)
    except ValueError as exc:
        raise PatternFormatError(f"{path}:{head_no}: bad header {head!r}: {exc}") from None

    et = np.full(grid.size, np.nan, dtype=complex)
    ep = np.full(grid.size, np.nan, dtype=complex)
    seen = np.zeros(grid.size, dtype=bool)
    for no, ln in rows[1:]:
        parts = ln.split(",")
        if len(parts) != 6:
            raise PatternFormatError(f"{path}:{no}: expected 6 fields, got {len(parts)}")
        try:
            t, p, a, b, c, d = (float(v) for v in parts)
        except ValueError:
            raise PatternFormatError(f"{path}:{no}: non-numeric field in {ln!r}") from None
        if not all(math.isfinite(v) for v in (t, p, a, b, c, d)):
            raise PatternFormatError(f"{path}:{no}: non-finite value")
        i = (t / theta_step) - 0.5
        j = (p / phi_step) - 0.5
        ii, jj = int(round(i)), int(round(j))
        if abs(i - ii) > 1e-6 or abs(j - jj) > 1e-6 or not (
            0 <= ii < grid.n_theta and 0 <= jj < grid.n_phi
        ):
            raise PatternFormatError(
                f"{path}:{no}: ({t:g}, {p:g}) is not a cell centre of the declared "
                f"{theta_step:g}x{phi_step:g} grid"
            )
        k = ii * grid.n_phi + jj
        if seen[k]:
            raise PatternFormatError(f"{path}:{no}: duplicate cell ({t:g}, {p:g})")
        seen[k] = True
        et[k] = complex(a, b)
        ep[k] = complex(c, d)

    if not seen.all():
        k = int(np.flatnonzero(~seen)[0])
        raise PatternFormatError(
            f"{path}: {int((~seen).sum())} cell(s) missing; first missing cell is "
            f"(theta={grid.theta[k]:g}, phi={grid.phi[k]:g})"
        )
    return ElementPattern(grid, et, ep)


# ---------------------------------------------------------------------------
# Design hierarchy


@dataclass(frozen=True, eq=False)
class Subarray:
    """Elements driven coherently through one feed.

    A dual-polarized patch subarray is two ``Subarray`` instances sharing
    ``group``, one per feed.
    """

    id: str
    kind: Kind
    feed: Pol
    dims: tuple[int, int, int]
    boresight: Direction
    element_patterns: tuple[ElementPattern, ...]
    positions: np.ndarray = field(repr=False)
    group: str = ""
    beams: int = 0
    scan_span: float = 0.0

    def __post_init__(self):
        if len(self.element_patterns) < 1:
            raise ValueError("a subarray needs at least one element")
        if len(self.element_patterns) != int(np.prod(self.dims)):
            raise ValueError("element count does not match dims")
        if self.feed not in POLS:
            raise ValueError(f"bad feed {self.feed!r}")
        if not self.group:
            object.__setattr__(self, "group", self.id)

    @property
    def size(self) -> int:
        return len(self.element_patterns)

    @property
    def grid(self) -> SphereGrid:
        return self.element_patterns[0].grid

    def responses(self, pol: Pol) -> np.ndarray:
        """Grid responses in polarization ``pol``, shape ``(N, grid.size)``."""
        cache = self.__dict__.setdefault("_resp", {})
        if pol not in cache:
            arr = np.stack([p.component(pol) for p in self.element_patterns])
            arr.setflags(write=False)
            cache[pol] = arr
        return cache[pol]

    def response_at(self, theta, phi, pol: Pol) -> np.ndarray:
        """Responses at arbitrary directions, shape ``(N,) + theta.shape``."""
        k = 0 if pol == "theta" else 1
        return np.stack([p.at(theta, phi)[k] for p in self.element_patterns])

    @property
    def scan_axes(self) -> list[np.ndarray]:
        eye = np.eye(3)
        return [eye[i] for i in range(3) if self.dims[i] > 1]


@dataclass(frozen=True, eq=False)
class AntennaModule:
    placement: str
    subarrays: tuple[Subarray, ...]

    def __post_init__(self):
        if not self.subarrays:
            raise ValueError("a module needs at least one subarray")

    @property
    def num_elements(self) -> int:
        return sum(s.size for s in self.subarrays)


@dataclass(frozen=True, eq=False)
class UeDesign:
    name: str
    modules: tuple[AntennaModule, ...]

    @property
    def subarrays(self) -> list[Subarray]:
        return [s for m in self.modules for s in m.subarrays]

    @property
    def num_elements(self) -> int:
        return sum(m.num_elements for m in self.modules)

    @property
    def grid(self) -> SphereGrid:
        return self.subarrays[0].grid


def ideal_subarray(
    dims: Sequence[int], grid: SphereGrid, id: str = "ideal", feed: Pol = "theta",
    boresight: Optional[Direction] = None, beams: int = 0, scan_span: float = 0.0,
) -> Subarray:
    """Subarray of isotropic elements following the ideal half-wavelength array model."""
    dims = tuple(int(v) for v in dims)
    total = int(np.prod(dims))
    patterns = tuple(_on_grid(grid, _ideal_model(dims, n)) for n in range(1, total + 1))
    if boresight is None:
        # broadside of a linear array along its axis; +Y for planar/degenerate cases
        axes = [i for i in range(3) if dims[i] > 1]
        boresight = Direction(90.0, 0.0) if axes in ([1], [2]) else Direction(90.0, 90.0)
    return Subarray(id, "ideal", feed, dims, boresight, patterns, element_positions(dims),
                    beams=beams, scan_span=scan_span)


def _vec(v) -> Direction:
    if isinstance(v, Direction):
        return v
    return Direction(float(v[0]), float(v[1]))


def build_subarray(spec: dict, grid: SphereGrid, base_dir: Optional[Path] = None) -> Subarray:
    """Build one subarray from its declarative description (see ``designs``)."""
    dims = tuple(int(v) for v in spec["dims"])
    if len(dims) != 3:
        raise ValueError(f"dims must have three entries, got {spec['dims']}")
    kind = spec["kind"]
    feed = spec["feed"]
    boresight = _vec(spec["boresight"])
    positions = element_positions(dims)
    if kind == "ideal":
        sub = ideal_subarray(dims, grid, spec["id"], feed, boresight,
                             spec.get("beams", 0), spec.get("scan_span", 0.0))
        return sub
    files = spec.get("pattern_files")
    if files:
        if len(files) != len(positions):
            raise ValueError(f"subarray {spec['id']}: {len(files)} pattern files for {len(positions)} elements")
        patterns = []
        for f in files:
            p = Path(f) if base_dir is None else base_dir / f
            pat = load_pattern_file(p)
            if pat.grid != grid:
                raise ValueError(f"{p}: pattern grid {pat.grid.shape} does not match {grid.shape}")
            patterns.append(pat)
        patterns = tuple(patterns)
    else:
        patterns = tuple(
            synthetic_element_pattern(kind, boresight, float(spec["peak_gain_dbi"]),
                                      spec.get("beamwidth"), grid, feed, pos)
            for pos in positions
        )
    return Subarray(
        id=spec["id"], kind=kind, feed=feed, dims=dims, boresight=boresight,
        element_patterns=patterns, positions=positions, group=spec.get("group", ""),
        beams=int(spec.get("beams", 0)), scan_span=float(spec.get("scan_span", 0.0)),
    )


_DESIGN_KEYS = {"name", "modules"}
_MODULE_KEYS = {"placement", "subarrays"}
_SUBARRAY_KEYS = {"id", "kind", "feed", "dims", "boresight", "peak_gain_dbi", "beamwidth",
                  "group", "beams", "scan_span", "pattern_files"}


def validate_design_spec(spec: dict) -> None:
    """Reject unknown keys and missing required fields in a design description."""
    def check(d, allowed, where):
        extra = set(d) - allowed
        if extra:
            raise ValueError(f"{where}: unknown key(s) {sorted(extra)}")

    check(spec, _DESIGN_KEYS, "design")
    if not spec.get("modules"):
        raise ValueError("design: at least one module is required")
    ids = set()
    for m in spec["modules"]:
        check(m, _MODULE_KEYS, f"module {m.get('placement', '?')}")
        if not m.get("subarrays"):
            raise ValueError(f"module {m.get('placement', '?')}: no subarrays")
        for s in m["subarrays"]:
            check(s, _SUBARRAY_KEYS, f"subarray {s.get('id', '?')}")
            for key in ("id", "kind", "feed", "dims", "boresight"):
                if key not in s:
                    raise ValueError(f"subarray {s.get('id', '?')}: missing {key!r}")
            if s["kind"] in ("patch", "dipole") and "peak_gain_dbi" not in s and not s.get("pattern_files"):
                raise ValueError(f"subarray {s['id']}: peak_gain_dbi required for synthetic patterns")
            if s["id"] in ids:
                raise ValueError(f"duplicate subarray id {s['id']!r}")
            ids.add(s["id"])


def design_from_spec(spec: dict, grid: SphereGrid, base_dir: Optional[Path] = None) -> UeDesign:
    validate_design_spec(spec)
    modules = tuple(
        AntennaModule(m["placement"], tuple(build_subarray(s, grid, base_dir) for s in m["subarrays"]))
        for m in spec["modules"]
    )
    return UeDesign(spec.get("name", "custom"), modules)


def build_design(name: str, grid: Optional[SphereGrid] = None) -> UeDesign:
    """Build one of the preset designs: ``face``, ``edge``, ``design3`` or ``design4``."""
    from .designs import PRESETS

    if name not in PRESETS:
        raise ValueError(f"unknown design {name!r}; choose from {sorted(PRESETS)}")
    return design_from_spec(PRESETS[name], grid or make_grid(1.0, 1.0))
