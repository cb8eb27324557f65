"""Spherical coverage of millimeter-wave UE antenna designs."""
from .antenna import ElementPattern, Subarray, UeDesign, build_design, load_pattern_file
from .beamforming import evaluate_design
from .blockage import LANDSCAPE, PORTRAIT, BlockageRegion, apply_blockage
from .codebook import Codebook, generate_design_codebook
from .coverage import GainMap, CoverageCdf, compare, percentile, spherical_cdf
from .geometry import Direction, SphereGrid, integrate, make_grid

__version__ = "0.1.0"

__all__ = [
    "BlockageRegion", "Codebook", "CoverageCdf", "Direction", "ElementPattern", "GainMap",
    "LANDSCAPE", "PORTRAIT", "SphereGrid", "Subarray", "UeDesign", "apply_blockage",
    "build_design", "compare", "evaluate_design", "generate_design_codebook", "integrate",
    "load_pattern_file", "make_grid", "percentile", "spherical_cdf",
]
