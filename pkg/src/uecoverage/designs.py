"""
Declarative descriptions of the built-in UE designs.

Chassis frame: X across the width (right edge +X), Y along the display
normal (front +Y), Z along the long axis (top edge +Z). Boresights are
``[theta, phi]`` in degrees. Element spacing is half a wavelength along the
global axes, so ``dims`` doubles as the scan-axis description: a subarray
scans along every axis with more than one element.

The same schema is accepted by ``--design-file`` (JSON). A subarray may name
``pattern_files`` (one per element, pattern-grid format) instead of
``peak_gain_dbi`` to use externally simulated or measured patterns.
"""
from __future__ import annotations

import copy

PLUS_X = [90.0, 0.0]
MINUS_X = [90.0, 180.0]
PLUS_Y = [90.0, 90.0]
MINUS_Y = [90.0, 270.0]
PLUS_Z = [0.0, 0.0]
MINUS_Z = [180.0, 0.0]

FACE_PATCH_DBI = 5.8
FACE_DIPOLE_DBI = 4.7
EDGE_PATCH_DBI = 5.5

# Half-span (degrees) of the scan range covered by a subarray's beams.
SPAN_4X1 = 60.0
SPAN_2X2 = 55.0
SPAN_DIPOLE_2X1 = 54.0
# Three beams on a 4x1 subarray, spaced ~30 degrees for half-power crossover.
SPAN_4X1_3BEAM = 45.0


def _dual_patch(prefix, dims, boresight, gain, beams, span):
    return [
        {"id": f"{prefix}-patch-{pol}", "group": f"{prefix}-patch", "kind": "patch",
         "feed": pol, "dims": list(dims), "boresight": list(boresight),
         "peak_gain_dbi": gain, "beams": beams, "scan_span": span}
        for pol in ("theta", "phi")
    ]


def _dipole(sub_id, dims, boresight, gain, feed, beams, span, group=None):
    return {"id": sub_id, "group": group or sub_id, "kind": "dipole", "feed": feed,
            "dims": list(dims), "boresight": list(boresight), "peak_gain_dbi": gain,
            "beams": beams, "scan_span": span}


def _face_module(placement, face, side, end, side_axis_dims, end_axis_dims):
    return {
        "placement": placement,
        "subarrays": _dual_patch(placement, (2, 1, 2), face, FACE_PATCH_DBI, 4, SPAN_2X2) + [
            _dipole(f"{placement}-dipole-side", side_axis_dims, side, FACE_DIPOLE_DBI, "theta",
                    2, SPAN_DIPOLE_2X1, group=f"{placement}-dipole"),
            _dipole(f"{placement}-dipole-end", end_axis_dims, end, FACE_DIPOLE_DBI, "phi",
                    2, SPAN_DIPOLE_2X1, group=f"{placement}-dipole"),
        ],
    }


FACE = {
    "name": "face",
    "modules": [
        # front module at the top-right corner, back module at the bottom-left
        _face_module("front", PLUS_Y, PLUS_X, PLUS_Z, (1, 1, 2), (2, 1, 1)),
        _face_module("back", MINUS_Y, MINUS_X, MINUS_Z, (1, 1, 2), (2, 1, 1)),
    ],
}

# edge name -> (outward normal, dims of a 4x1 array running along that edge)
_EDGES = {
    "edge-right": (PLUS_X, (1, 1, 4)),
    "edge-left": (MINUS_X, (1, 1, 4)),
    "edge-top": (PLUS_Z, (4, 1, 1)),
    "edge-bottom": (MINUS_Z, (4, 1, 1)),
}

EDGE = {
    "name": "edge",
    "modules": [
        {"placement": e, "subarrays": _dual_patch(e, _EDGES[e][1], _EDGES[e][0], EDGE_PATCH_DBI, 4, SPAN_4X1)}
        for e in ("edge-right", "edge-left", "edge-top")
    ],
}

DESIGN3 = {
    "name": "design3",
    "modules": [
        {
            "placement": e,
            "subarrays": _dual_patch(e, dims, normal, EDGE_PATCH_DBI, 4, SPAN_4X1) + [
                _dipole(f"{e}-dipole", dims, normal, FACE_DIPOLE_DBI,
                        "theta" if e in ("edge-right", "edge-left") else "phi", 4, SPAN_4X1)
            ],
        }
        for e, (normal, dims) in _EDGES.items()
    ],
}

# L-shaped corner modules, each covering two adjacent edges.
_CORNERS = [
    ("corner-top-right", "edge-right", "edge-top"),
    ("corner-top-left", "edge-top", "edge-left"),
    ("corner-bottom-left", "edge-left", "edge-bottom"),
    ("corner-bottom-right", "edge-bottom", "edge-right"),
]

DESIGN4 = {
    "name": "design4",
    "modules": [
        {
            "placement": corner,
            "subarrays": [
                s
                for leg in (a, b)
                for s in _dual_patch(f"{corner}-{leg.split('-')[1]}", _EDGES[leg][1], _EDGES[leg][0],
                                     EDGE_PATCH_DBI, 3, SPAN_4X1_3BEAM)
            ],
        }
        for corner, a, b in _CORNERS
    ],
}

PRESETS = {"face": FACE, "edge": EDGE, "design3": DESIGN3, "design4": DESIGN4}


def preset_spec(name: str) -> dict:
    """A deep copy of a preset description, suitable as a starting point for custom files."""
    return copy.deepcopy(PRESETS[name])
