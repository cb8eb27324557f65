"""
Array gain of the four beamforming schemes.

All gain functions take complex element responses with the element index
on axis 0 (any trailing shape, typically one column per direction) and
return linear power gains.
"""
from __future__ import annotations

from typing import Literal

import numpy as np

from .antenna import POLS, UeDesign
from .coverage import GainMap

Scheme = Literal["mrc", "egc", "cbk", "antsel"]
SCHEMES: tuple[str, ...] = ("mrc", "egc", "cbk", "antsel")
Combining = Literal["subarray", "module"]

NORM_TOL = 1e-9


def _responses(responses) -> np.ndarray:
    r = np.asarray(responses, dtype=complex)
    if r.ndim == 0 or r.shape[0] == 0:
        raise ValueError("at least one element response is required")
    return r


def mrc_gain(responses) -> np.ndarray:
    """Maximum ratio combining: ``sum |E_i|^2``."""
    r = _responses(responses)
    return np.sum(r.real**2 + r.imag**2, axis=0)


def mrc_weights(responses) -> np.ndarray:
    """Unit-norm MRC weights ``E / ||E||`` (all zeros for an all-zero response)."""
    r = _responses(responses)
    norm = np.sqrt(mrc_gain(r))
    return np.divide(r, norm, out=np.zeros_like(r), where=norm > 0)


def egc_gain(responses) -> np.ndarray:
    """Equal gain combining: ``(sum |E_i|)^2 / N``."""
    r = _responses(responses)
    return np.sum(np.abs(r), axis=0) ** 2 / r.shape[0]


def _check_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=complex)
    if w.ndim == 1:
        w = w[np.newaxis, :]
    if w.shape[0] == 0:
        raise ValueError("codebook is empty")
    norms = np.linalg.norm(w, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > NORM_TOL)
    if bad.size:
        raise ValueError(f"weight vector {bad[0]} has norm {norms[bad[0]]:.12g}, expected 1")
    return w


def beam_gains(weights, responses) -> np.ndarray:
    """``|w_j^H E|^2`` for every beam ``j``; shape ``(K,) + responses.shape[1:]``."""
    w = _check_weights(weights)
    r = _responses(responses)
    if w.shape[1] != r.shape[0]:
        raise ValueError(f"weights have {w.shape[1]} entries, responses {r.shape[0]}")
    y = np.tensordot(w.conj(), r, axes=(1, 0))
    return y.real**2 + y.imag**2


def codebook_gain(weights, responses) -> np.ndarray:
    """Best-beam gain ``max_j |w_j^H E|^2`` over a codebook of unit-norm beams."""
    return beam_gains(weights, responses).max(axis=0)


def selection_gain(responses) -> np.ndarray:
    """Best single element: ``max_i |E_i|^2``."""
    r = _responses(responses)
    return np.max(r.real**2 + r.imag**2, axis=0)


def total_gain(gain_theta, gain_phi):
    """Sum of the two polarization gains (the selection-diversity metric)."""
    return np.add(gain_theta, gain_phi)


def max_gain(gain_theta, gain_phi):
    """Larger of the two polarization gains, for comparison studies."""
    return np.maximum(gain_theta, gain_phi)


def _best(stack: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    arr = np.stack(stack)
    idx = np.argmax(arr, axis=0)  # first maximum wins ties
    return np.take_along_axis(arr, idx[np.newaxis], axis=0)[0], idx


def polarization_gain(design: UeDesign, scheme: Scheme, pol: str, codebook=None,
                      combining: Combining = "subarray") -> tuple[np.ndarray, np.ndarray]:
    """Per-direction gain in one polarization and the index of the winning unit.

    The winning unit is a subarray (mrc/egc, ``combining='subarray'``), a
    module (``combining='module'``), a beam index into ``codebook.beams``
    (cbk) or a pooled element index (antsel).
    """
    subs = design.subarrays
    if scheme in ("mrc", "egc"):
        fn = mrc_gain if scheme == "mrc" else egc_gain
        if combining == "subarray":
            units = [s.responses(pol) for s in subs]
        elif combining == "module":
            units = [np.concatenate([s.responses(pol) for s in m.subarrays]) for m in design.modules]
        else:
            raise ValueError(f"unknown combining mode {combining!r}")
        return _best([fn(u) for u in units])
    if scheme == "antsel":
        pooled = np.concatenate([s.responses(pol) for s in subs])
        g = pooled.real**2 + pooled.imag**2
        idx = np.argmax(g, axis=0)
        return np.take_along_axis(g, idx[np.newaxis], axis=0)[0], idx
    if scheme == "cbk":
        if codebook is None:
            raise ValueError("scheme 'cbk' requires a codebook")
        by_id = {s.id: s for s in subs}
        gains = []
        for beam in codebook.beams:
            sub = by_id.get(beam.subarray_id)
            if sub is None:
                raise ValueError(f"beam bound to unknown subarray {beam.subarray_id!r}")
            gains.append(beam_gains(beam.weights, sub.responses(pol))[0])
        return _best(gains)
    raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")


def evaluate_design(design: UeDesign, scheme: Scheme, codebook=None,
                    combining: Combining = "subarray") -> GainMap:
    """Total array gain of ``design`` over its grid under ``scheme``.

    MRC and EGC pick the best subarray per direction and polarization
    (``combining='module'`` pools each module's elements instead); the
    codebook scheme picks the best beam across all subarrays; antenna
    selection pools every element of the design. The two polarization
    gains are then summed.
    """
    if scheme == "cbk" and codebook is None:
        raise ValueError("scheme 'cbk' requires a codebook")
    g_t, i_t = polarization_gain(design, scheme, "theta", codebook, combining)
    g_p, i_p = polarization_gain(design, scheme, "phi", codebook, combining)
    return GainMap(
        grid=design.grid,
        total=total_gain(g_t, g_p),
        gain_theta=g_t,
        gain_phi=g_p,
        best_theta=i_t,
        best_phi=i_p,
        meta={"design": design.name, "scheme": scheme, "combining": combining},
    )


__all__ = [
    "SCHEMES", "mrc_gain", "mrc_weights", "egc_gain", "beam_gains", "codebook_gain",
    "selection_gain", "total_gain", "max_gain", "polarization_gain", "evaluate_design",
    "POLS",
]
