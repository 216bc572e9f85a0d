"""
Report emission.

Each artifact is written as a comma-separated table with a fixed header and,
for figures, an SVG next to it sharing the same stem. Tables are the
authoritative output.
"""

from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import pandas as pd
import structlog

from ..errors import ContractError, ErrorSource, ReportError
from ..prompts import PromptRenderer
from ..recalibration import RecalibrationMap
from ..util import file_sha256, safe_json_encode
from . import svg
from .aggregate import AggregateCurves
from .heatmap import Heatmap

logger = structlog.get_logger(__name__)

CURVE_HEADER = ("certainty", "sim_ctx", "sim_prior", "deviation", "ideal_ctx", "ideal_prior", "n")
ABS_ERROR_HEADER = ("certainty", "abs_ctx_error", "abs_prior_error", "deviation", "n")
HEATMAP_HEADER = ("confidence_low", "confidence_high", "certainty_low", "certainty_high",
                  "mean_deviation", "count")
MAP_HEADER = ("target", "expressed")

FLOAT_FORMAT = "%.6f"
TABLE_FORMAT = "%.2f"

PathLike = Union[str, Path]


def _stem(path: PathLike) -> Path:
    path = Path(path)
    return path.with_suffix("") if path.suffix in (".csv", ".svg") else path


def _write_frame(frame: pd.DataFrame, path: Path, float_format: str = FLOAT_FORMAT,
                 index: bool = False) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=index, float_format=float_format, lineterminator="\n")
    except OSError as e:
        raise ReportError(f"cannot write table: {e}", path=str(path), cause=e)
    logger.info("report.emit", path=str(path), rows=len(frame))
    return path


def _write_text(text: str, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ReportError(f"cannot write file: {e}", path=str(path), cause=e)
    logger.info("report.emit", path=str(path))
    return path


def curves_frame(curves: AggregateCurves) -> pd.DataFrame:
    return pd.DataFrame({
        "certainty": list(curves.sweep.grid),
        "sim_ctx": list(curves.sim_ctx),
        "sim_prior": list(curves.sim_prior),
        "deviation": list(curves.deviation),
        "ideal_ctx": list(curves.ideal_ctx),
        "ideal_prior": list(curves.ideal_prior),
        "n": [curves.n] * len(curves.sweep),
    }, columns=list(CURVE_HEADER))


def abs_error_frame(curves: AggregateCurves) -> pd.DataFrame:
    return pd.DataFrame({
        "certainty": list(curves.sweep.grid),
        "abs_ctx_error": list(curves.abs_ctx_error),
        "abs_prior_error": list(curves.abs_prior_error),
        "deviation": list(curves.deviation),
        "n": [curves.n] * len(curves.sweep),
    }, columns=list(ABS_ERROR_HEADER))


def heatmap_frame(grid: Heatmap) -> pd.DataFrame:
    rows = []
    size = len(grid.edges) - 1
    for i in range(size):
        for j in range(size):
            rows.append((grid.edges[i], grid.edges[i + 1], grid.edges[j], grid.edges[j + 1],
                         grid.means[i][j], grid.counts[i][j]))
    return pd.DataFrame(rows, columns=list(HEATMAP_HEADER))


def map_frame(recalibration: RecalibrationMap) -> pd.DataFrame:
    return pd.DataFrame(list(recalibration.pairs()), columns=list(MAP_HEADER))


def emit_curves(curves: AggregateCurves, path: PathLike, title: str = "Context-certainty obedience") -> List[Path]:
    """Signed mean curves, absolute-error curves and a three-panel figure."""
    stem = _stem(path)
    grid = curves.sweep.grid
    panels = [
        ("Similarity to context", "1 - TVD", [
            ("observed", grid, curves.sim_ctx, False),
            ("ideal", grid, curves.ideal_ctx, True),
        ]),
        ("Similarity to prior", "1 - TVD", [
            ("observed", grid, curves.sim_prior, False),
            ("ideal", grid, curves.ideal_prior, True),
        ]),
        ("Deviation from ideal", "TVD", [
            (f"deviation (eps={curves.epsilon_obey:.3f})", grid, curves.deviation, False),
            ("mean |ctx error|", grid, curves.abs_ctx_error, True),
        ]),
    ]
    return [
        _write_frame(curves_frame(curves), stem.with_suffix(".csv")),
        _write_frame(abs_error_frame(curves), stem.parent / f"{stem.name}_abs.csv"),
        _write_text(svg.line_panels(f"{title} (n={curves.n})", panels), stem.with_suffix(".svg")),
    ]


def emit_table(table: pd.DataFrame, path: PathLike) -> List[Path]:
    """Two-decimal table keyed by mode label."""
    return [_write_frame(table, _stem(path).with_suffix(".csv"), float_format=TABLE_FORMAT, index=True)]


def emit_heatmap(grid: Heatmap, path: PathLike, title: str = "Deviation by self-confidence") -> List[Path]:
    stem = _stem(path)
    return [
        _write_frame(heatmap_frame(grid), stem.with_suffix(".csv")),
        _write_text(svg.heatmap_grid(title, grid.edges, grid.means, grid.counts), stem.with_suffix(".svg")),
    ]


def emit_map(recalibration: RecalibrationMap, path: PathLike, title: str = "Certainty recalibration") -> List[Path]:
    stem = _stem(path)
    targets, expressed = zip(*recalibration.pairs())
    return [
        _write_frame(map_frame(recalibration), stem.with_suffix(".csv")),
        _write_text(svg.step_map(title, targets, expressed), stem.with_suffix(".svg")),
    ]


def emit(artifact: Any, path: PathLike) -> List[Path]:
    """Write curves, a table, a heatmap or a recalibration map under ``path``."""
    if isinstance(artifact, AggregateCurves):
        return emit_curves(artifact, path)
    if isinstance(artifact, pd.DataFrame):
        return emit_table(artifact, path)
    if isinstance(artifact, Heatmap):
        return emit_heatmap(artifact, path)
    if isinstance(artifact, RecalibrationMap):
        return emit_map(artifact, path)
    raise ContractError(f"cannot emit {type(artifact).__name__}", source=ErrorSource.REPORT)


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def build_manifest(
    config: Mapping[str, Any],
    *,
    command: str,
    flags: Mapping[str, Any],
    backend_identity: str,
    renderer: Optional[PromptRenderer] = None,
    dataset_path: Optional[PathLike] = None,
    started_at: Optional[str] = None,
    finished_at: Optional[str] = None,
    summary: Optional[Mapping[str, Any]] = None,
) -> Dict[str, Any]:
    """Everything needed to repeat a run: configuration, inputs by hash and the backend."""
    from .. import __version__

    renderer = renderer or PromptRenderer()
    return {
        "version": __version__,
        "command": command,
        "flags": dict(flags),
        "config": dict(config),
        "dataset": {
            "path": str(dataset_path) if dataset_path else None,
            "sha256": file_sha256(dataset_path) if dataset_path else None,
        },
        "templates": renderer.template_hashes(),
        "backend": backend_identity,
        "system_prompt": "none",
        "started_at": started_at,
        "finished_at": finished_at or utc_now(),
        "summary": dict(summary or {}),
    }


def write_manifest(manifest: Mapping[str, Any], path: PathLike) -> Path:
    return _write_text(safe_json_encode(dict(manifest), pretty=True) + "\n", Path(path))
