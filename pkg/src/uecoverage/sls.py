"""
Single-link Monte Carlo of per-layer spectral efficiency.

One base station with a 16 x 4 half-wavelength array and 16 fixed DFT
beams serves one UE over a few clusters. For each drop the best BS beam is
found jointly with the best UE beam of each polarization layer, and the
per-layer SNR follows from the link budget:

    SNR = EIRP - PL - SF + G_bs,rel + G_ue - (-174 + 10 log10(BW) + NF)

``G_bs,rel`` is the BS beam's power gain towards the departure angle
relative to its peak (EIRP already contains the peak array gain) and
``G_ue`` is the UE beam gain summed coherently over clusters.

Cluster geometry is not taken from measurements: departure angles are
uniform over the BS sector, arrival angles uniform over the UE sphere and
cluster powers follow a normalised exponential profile.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .antenna import UeDesign
from .codebook import Codebook
from .coverage import to_db
from .geometry import unit_vectors

SPEED_OF_LIGHT = 299_792_458.0
THERMAL_NOISE_DBM_HZ = -174.0


@dataclass(frozen=True)
class LinkBudget:
    eirp_dbm: float = 45.0
    bandwidth_hz: float = 100e6
    noise_figure_db: float = 10.0
    ple: float = 3.46
    shadow_sigma_db: float = 8.31
    distance_m: float = 30.0
    carrier_hz: float = 28e9
    num_clusters: int = 4
    se_cap: float = 7.4
    sector_az_deg: float = 120.0
    sector_el_deg: float = 30.0

    @property
    def noise_dbm(self) -> float:
        return THERMAL_NOISE_DBM_HZ + 10 * math.log10(self.bandwidth_hz) + self.noise_figure_db


def free_space_intercept(carrier_hz: float) -> float:
    """Free-space path loss at 1 m, dB."""
    return 20 * math.log10(4 * math.pi * carrier_hz / SPEED_OF_LIGHT)


def path_loss(distance: float, ple: float = 3.46, carrier: float = 28e9) -> float:
    """Close-in path loss (dB) with a 1 m free-space reference."""
    if distance < 1.0:
        raise ValueError(f"distance must be at least 1 m, got {distance}")
    return free_space_intercept(carrier) + 10 * ple * math.log10(distance)


def spectral_efficiency_from_snr(snr_db, cap: float = 7.4):
    snr = 10 ** (np.asarray(snr_db, dtype=float) / 10)
    return np.minimum(np.log2(1 + snr), cap)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Cluster angles (degrees), powers, phases and the shadow-fading draw."""

    aoa_theta: np.ndarray
    aoa_phi: np.ndarray
    aod_theta: np.ndarray
    aod_phi: np.ndarray
    power: np.ndarray
    phase: np.ndarray
    pol_phase: np.ndarray  # (clusters, 2): extra phase per polarization
    shadow_db: float = 0.0

    @property
    def num_clusters(self) -> int:
        return int(np.size(self.power))

    @property
    def amplitude(self) -> np.ndarray:
        """Complex cluster amplitude per polarization, shape ``(clusters, 2)``."""
        a = np.sqrt(self.power) * np.exp(1j * self.phase)
        return a[:, None] * np.exp(1j * np.asarray(self.pol_phase))


def draw_channel(budget: LinkBudget, seed: int) -> ChannelRealization:
    rng = np.random.default_rng(seed)
    c = budget.num_clusters
    aod_phi = rng.uniform(-budget.sector_az_deg / 2, budget.sector_az_deg / 2, c)
    aod_theta = 90.0 + rng.uniform(-budget.sector_el_deg / 2, budget.sector_el_deg / 2, c)
    aoa_theta = np.degrees(np.arccos(rng.uniform(-1.0, 1.0, c)))
    aoa_phi = rng.uniform(0.0, 360.0, c)
    p = rng.exponential(1.0, c)
    phase = rng.uniform(0, 2 * np.pi, c)
    pol_phase = rng.uniform(0, 2 * np.pi, (c, 2))
    shadow = rng.normal(0.0, budget.shadow_sigma_db)
    return ChannelRealization(aoa_theta, aoa_phi, aod_theta, aod_phi, p / p.sum(), phase,
                              pol_phase, float(shadow))


# ---------------------------------------------------------------------------
# Base-station codebook


@dataclass(frozen=True, eq=False)
class BsCodebook:
    """Fixed BS beams over an ``n_h x n_v`` array in the y-z plane, boresight +x."""

    n_h: int
    n_v: int
    weights: np.ndarray  # (beams, n_h * n_v), unit norm

    def response(self, theta, phi) -> np.ndarray:
        """Unit-magnitude element responses, shape ``(n_h * n_v,) + theta.shape``."""
        u = unit_vectors(theta, phi)
        m = np.arange(self.n_h)
        n = np.arange(self.n_v)
        ph = np.exp(1j * np.pi * np.multiply.outer(m, u[..., 1]))
        pv = np.exp(1j * np.pi * np.multiply.outer(n, u[..., 2]))
        return (ph[:, None] * pv[None, :]).reshape((self.n_h * self.n_v,) + u.shape[:-1])

    def relative_gain(self, theta, phi) -> np.ndarray:
        """Complex beam response normalised so the peak power is 1; ``(beams,) + shape``."""
        a = self.response(theta, phi)
        y = np.tensordot(self.weights.conj(), a, axes=(1, 0))
        return y / math.sqrt(self.n_h * self.n_v)


def dft_bs_codebook(n_h: int = 16, n_v: int = 4, n_az: int = 8, n_el: int = 2) -> BsCodebook:
    """Kronecker DFT beams: ``n_az`` horizontal and ``n_el`` vertical columns.

    Horizontal beams are every ``n_h / n_az``-th column of a half-bin shifted
    ``n_h``-point DFT, which for the defaults spans roughly +-60 degrees;
    vertical beams are the central ``n_el`` shifted columns of the
    ``n_v``-point DFT.
    """
    step_h = n_h // n_az
    u = (2 * np.arange(n_az) * step_h + step_h - n_h) / n_h
    v = (2 * np.arange(n_el) + 1 - n_el) / n_v
    m = np.arange(n_h)
    n = np.arange(n_v)
    beams = []
    for uu in u:
        for vv in v:
            w = np.kron(np.exp(1j * np.pi * m * uu), np.exp(1j * np.pi * n * vv))
            beams.append(w / np.linalg.norm(w))
    return BsCodebook(n_h, n_v, np.array(beams))


# ---------------------------------------------------------------------------
# Link evaluation


@dataclass(frozen=True, eq=False)
class LinkResult:
    """Per-drop, per-layer results; layer 0 is Theta, layer 1 is Phi."""

    seeds: np.ndarray
    bs_beam: np.ndarray  # (drops,)
    ue_beam: np.ndarray  # (drops, 2); -1 when a layer has no usable beam
    snr_db: np.ndarray  # (drops, 2)
    se: np.ndarray  # (drops, 2), bps/Hz per layer
    meta: dict = field(default_factory=dict)

    def to_csv(self, path=None) -> str:
        """``drop,seed,bs_beam,ue_beam,snr_db,se_bps_hz``; one row per drop and layer."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["drop", "seed", "bs_beam", "ue_beam", "snr_db", "se_bps_hz"])
        for d in range(self.bs_beam.size):
            for layer in range(2):
                w.writerow([d, int(self.seeds[d]), int(self.bs_beam[d]), int(self.ue_beam[d, layer]),
                            f"{self.snr_db[d, layer]:.6f}", f"{self.se[d, layer]:.6f}"])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _ue_layer_power(design: UeDesign, ue_codebook, coeff: np.ndarray, cells: np.ndarray,
                    ue_mode: str) -> tuple[np.ndarray, np.ndarray]:
    """Best UE received power per (bs beam, drop) and layer, with beam indices.

    ``coeff`` is (bs_beams, drops, clusters, 2): channel amplitude times the
    BS beam response; ``cells`` is (drops, clusters) of UE grid indices.
    """
    subs = {s.id: s for s in design.subarrays}
    n_b, n_d = coeff.shape[:2]
    best = np.zeros((n_b, n_d, 2))
    arg = np.full((n_b, n_d, 2), -1, dtype=int)
    for layer, pol in enumerate(("theta", "phi")):
        c = coeff[..., layer]
        if ue_mode == "mrc":
            for k, sub in enumerate(design.subarrays):
                e = sub.responses(pol)[:, cells]  # (N, drops, clusters)
                v = np.einsum("bdc,ndc->bdn", c, e)
                p = np.sum(v.real**2 + v.imag**2, axis=-1)
                better = p > best[..., layer]
                best[..., layer] = np.where(better, p, best[..., layer])
                arg[..., layer] = np.where(better, k, arg[..., layer])
            continue
        for j, beam in enumerate(ue_codebook.beams):
            if beam.feed != pol:
                continue
            e = subs[beam.subarray_id].responses(pol)[:, cells]
            y = np.tensordot(beam.weights.conj(), e, axes=(0, 0))  # (drops, clusters)
            h = np.einsum("bdc,dc->bd", c, y)
            p = h.real**2 + h.imag**2
            better = p > best[..., layer]
            best[..., layer] = np.where(better, p, best[..., layer])
            arg[..., layer] = np.where(better, j, arg[..., layer])
    return best, arg


def evaluate_links(design: UeDesign, ue_codebook, bs_codebook: BsCodebook,
                   channels: list[ChannelRealization], budget: LinkBudget,
                   ue_mode: str = "codebook", seeds=None) -> LinkResult:
    """Exhaustive beam-pair search and per-layer SNR/SE for a batch of channels.

    The BS beam is shared by both layers and chosen to maximise the summed
    received power of the two layers' best UE beams. ``ue_mode='mrc'``
    replaces the UE codebook by unconstrained combining on each subarray,
    an upper bound on any codebook.
    """
    if ue_mode not in ("codebook", "mrc"):
        raise ValueError(f"unknown UE mode {ue_mode!r}")
    if ue_mode == "codebook" and (ue_codebook is None or len(ue_codebook.beams) == 0):
        raise ValueError("UE codebook is empty")
    if bs_codebook.weights.shape[0] == 0:
        raise ValueError("BS codebook is empty")
    if not channels:
        raise ValueError("no channel realizations")
    grid = design.grid
    aoa_t = np.array([ch.aoa_theta for ch in channels])
    aoa_p = np.array([ch.aoa_phi for ch in channels])
    aod_t = np.array([ch.aod_theta for ch in channels])
    aod_p = np.array([ch.aod_phi for ch in channels])
    amp = np.array([ch.amplitude for ch in channels])  # (drops, clusters, 2)
    shadow = np.array([ch.shadow_db for ch in channels])

    cells = grid.index_of(aoa_t, aoa_p)
    g_bs = bs_codebook.relative_gain(aod_t, aod_p)  # (beams, drops, clusters)
    coeff = g_bs[..., None] * amp[None]
    best, arg = _ue_layer_power(design, ue_codebook, coeff, cells, ue_mode)

    b_star = np.argmax(best.sum(axis=-1), axis=0)  # (drops,)
    d_idx = np.arange(len(channels))
    power = best[b_star, d_idx]  # (drops, 2)
    ue_beam = arg[b_star, d_idx]
    pl = path_loss(budget.distance_m, budget.ple, budget.carrier_hz)
    snr_db = budget.eirp_dbm - pl - shadow[:, None] + to_db(power) - budget.noise_dbm
    se = spectral_efficiency_from_snr(snr_db, budget.se_cap)
    if seeds is None:
        seeds = np.full(len(channels), -1)
    return LinkResult(np.asarray(seeds), b_star, ue_beam, snr_db, se,
                      {"design": design.name, "ue_mode": ue_mode})


def spectral_efficiency(design: UeDesign, ue_codebook, bs_codebook: BsCodebook,
                        channel: ChannelRealization, budget: LinkBudget,
                        ue_mode: str = "codebook") -> np.ndarray:
    """Per-layer spectral efficiency (bps/Hz) of one channel realization."""
    return evaluate_links(design, ue_codebook, bs_codebook, [channel], budget, ue_mode).se[0]


def drop_seeds(master_seed: int, n: int) -> np.ndarray:
    return np.random.SeedSequence(master_seed).generate_state(n, dtype=np.uint32).astype(np.int64)


def run_drops(design: UeDesign, ue_codebook: Codebook, budget: LinkBudget = LinkBudget(),
              n_drops: int = 10_000, seed: int = 0, bs_codebook: Optional[BsCodebook] = None,
              ue_mode: str = "codebook", chunk: int = 2000) -> LinkResult:
    """Independent drops with per-drop seeds derived from ``seed``."""
    bs = bs_codebook or dft_bs_codebook()
    seeds = drop_seeds(seed, n_drops)
    parts = []
    for start in range(0, n_drops, chunk):
        s = seeds[start:start + chunk]
        chans = [draw_channel(budget, int(x)) for x in s]
        parts.append(evaluate_links(design, ue_codebook, bs, chans, budget, ue_mode, s))
    return LinkResult(
        seeds,
        np.concatenate([p.bs_beam for p in parts]),
        np.concatenate([p.ue_beam for p in parts]),
        np.concatenate([p.snr_db for p in parts]),
        np.concatenate([p.se for p in parts]),
        {"design": design.name, "ue_mode": ue_mode, "seed": seed, "drops": n_drops},
    )
