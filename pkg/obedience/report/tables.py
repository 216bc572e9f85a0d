"""
Obedience-error tables: one row per prompt mode, one column per backend.
"""

from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..errors import ContractError, ErrorSource
from .aggregate import AggregateCurves

AVERAGE_COLUMN = "Average"
ROW_INDEX = "mode"

Cell = Union[AggregateCurves, float]


def round2(value: float) -> float:
    """Round half-up to two decimals, ignoring binary representation noise."""
    return float(Decimal(repr(round(float(value), 10))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _epsilon(cell: Cell) -> float:
    return cell.epsilon_obey if isinstance(cell, AggregateCurves) else float(cell)


def _check_comparable(runs: Mapping[str, Mapping[str, Cell]], backends: Sequence[str]) -> None:
    for backend in backends:
        reference: Optional[AggregateCurves] = None
        for label, row in runs.items():
            if backend not in row:
                raise ContractError(f"run {label!r} has no entry for backend {backend!r}",
                                    source=ErrorSource.REPORT)
            cell = row[backend]
            if not isinstance(cell, AggregateCurves):
                continue
            if reference is None:
                reference = cell
                continue
            if cell.sweep != reference.sweep:
                raise ContractError(f"run {label!r} on {backend!r} uses a different sweep",
                                    source=ErrorSource.REPORT)
            if set(cell.sample_ids) != set(reference.sample_ids):
                raise ContractError(f"run {label!r} on {backend!r} covers a different sample set",
                                    source=ErrorSource.REPORT)


def ablation_table(runs: Mapping[str, Mapping[str, Cell]]) -> pd.DataFrame:
    """
    Tabulate obedience errors for every (mode label, backend) pair.

    Cells hold either aggregated curves or a precomputed error. Rows keep the
    insertion order of ``runs``, columns the first-seen backend order, and a
    final ``Average`` column averages each row's unrounded values.
    """
    if not runs:
        raise ContractError("no runs to tabulate", source=ErrorSource.REPORT)
    backends: List[str] = []
    for row in runs.values():
        for backend in row:
            if backend not in backends:
                backends.append(backend)
    _check_comparable(runs, backends)

    data: Dict[str, List[float]] = {}
    for label, row in runs.items():
        values = [_epsilon(row[b]) for b in backends]
        data[label] = [round2(v) for v in values] + [round2(float(np.mean(values)))]
    table = pd.DataFrame.from_dict(data, orient="index", columns=backends + [AVERAGE_COLUMN])
    table.index.name = ROW_INDEX
    return table
