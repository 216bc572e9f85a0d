"""
Aggregation and emission of obedience results: mean curves, ablation
tables, self-confidence heatmaps and the run manifest.
"""

from .aggregate import AggregateCurves, aggregate, ideal_similarities, split_by_correctness
from .emit import (
    ABS_ERROR_HEADER,
    CURVE_HEADER,
    HEATMAP_HEADER,
    MAP_HEADER,
    build_manifest,
    curves_frame,
    emit,
    emit_curves,
    emit_heatmap,
    emit_map,
    emit_table,
    utc_now,
    write_manifest,
)
from .heatmap import BIN_EDGES, Heatmap, bin_index, heatmap
from .tables import AVERAGE_COLUMN, ablation_table, round2

__all__ = [
    "AggregateCurves",
    "aggregate",
    "ideal_similarities",
    "split_by_correctness",
    "ABS_ERROR_HEADER",
    "CURVE_HEADER",
    "HEATMAP_HEADER",
    "MAP_HEADER",
    "build_manifest",
    "curves_frame",
    "emit",
    "emit_curves",
    "emit_heatmap",
    "emit_map",
    "emit_table",
    "utc_now",
    "write_manifest",
    "BIN_EDGES",
    "Heatmap",
    "bin_index",
    "heatmap",
    "AVERAGE_COLUMN",
    "ablation_table",
    "round2",
]
