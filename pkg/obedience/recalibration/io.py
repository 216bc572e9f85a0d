"""
Plain-text persistence of recalibration maps.

A map file is a two-column CSV (``target,expressed``) preceded by ``#``
metadata lines, e.g.::

    # categories: Dates,Names
    # sample_count: 120
    # endpoint_violations: none
    target,expressed
    0,0
    0.2,0.4
"""

from pathlib import Path
from typing import Dict, Mapping, Union

import pandas as pd

from ..errors import ReportError
from ..prob import CertaintySweep
from .types import RecalibrationMap

HEADER = ("target", "expressed")


def format_map(recalibration: RecalibrationMap) -> str:
    lines = [
        f"# categories: {','.join(recalibration.categories) or 'none'}",
        f"# sample_count: {recalibration.sample_count}",
        f"# endpoint_violations: {','.join(recalibration.endpoint_violations) or 'none'}",
    ]
    held_out = recalibration.metadata.get("held_out")
    if held_out:
        lines.append(f"# held_out: {held_out}")
    lines.append(",".join(HEADER))
    lines.extend(f"{target:.6g},{expressed:.6g}" for target, expressed in recalibration.pairs())
    return "\n".join(lines) + "\n"


def save_map(recalibration: RecalibrationMap, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_map(recalibration), encoding="utf-8")
    except OSError as e:
        raise ReportError(f"cannot write recalibration map: {e}", path=str(path), cause=e)
    return path


def _read_metadata(path: Path) -> Dict[str, str]:
    metadata = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition(":")
            metadata[key.strip()] = value.strip()
    return metadata


def load_map(path: Union[str, Path]) -> RecalibrationMap:
    path = Path(path)
    try:
        metadata = _read_metadata(path)
        frame = pd.read_csv(path, comment="#")
    except (OSError, ValueError) as e:
        raise ReportError(f"cannot read recalibration map: {e}", path=str(path), cause=e)
    if tuple(frame.columns) != HEADER:
        raise ReportError(f"expected columns {HEADER}, found {tuple(frame.columns)}", path=str(path))
    try:
        sweep = CertaintySweep(tuple(float(v) for v in frame["target"]))
        categories = metadata.get("categories", "none")
        loaded = RecalibrationMap(
            sweep,
            tuple(float(v) for v in frame["expressed"]),
            categories=() if categories == "none" else tuple(categories.split(",")),
            sample_count=int(metadata.get("sample_count", 0)),
        )
    except Exception as e:
        raise ReportError(f"invalid recalibration map: {e}", path=str(path), cause=e)
    if metadata.get("held_out"):
        loaded.metadata["held_out"] = metadata["held_out"]
    return loaded


def save_maps(maps: Mapping[str, RecalibrationMap], directory: Union[str, Path]) -> Dict[str, Path]:
    """One file per category, named ``<category>.csv``."""
    directory = Path(directory)
    return {category: save_map(m, directory / f"{_slug(category)}.csv") for category, m in maps.items()}


def load_maps(directory: Union[str, Path]) -> Dict[str, RecalibrationMap]:
    """Per-category maps saved by ``save_maps``, keyed by their held-out category."""
    maps = {}
    for path in sorted(Path(directory).glob("*.csv")):
        loaded = load_map(path)
        maps[loaded.metadata.get("held_out", path.stem)] = loaded
    return maps


def _slug(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in name) or "category"
