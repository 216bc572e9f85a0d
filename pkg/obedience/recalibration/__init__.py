"""
Certainty recalibration: fit a grid lookup from target certainty to the
certainty that should be expressed, and apply it.
"""

from .fit import apply, fit, fit_held_out, tvd_grid, tvd_grid_from
from .io import format_map, load_map, load_maps, save_map, save_maps
from .types import RecalibrationMap, TvdGrid

__all__ = [
    "RecalibrationMap",
    "TvdGrid",
    "apply",
    "fit",
    "fit_held_out",
    "format_map",
    "load_map",
    "load_maps",
    "save_map",
    "save_maps",
    "tvd_grid",
    "tvd_grid_from",
]
