"""
Self-confidence by context-certainty heatmap of the deviation from ideal.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..errors import ContractError, ErrorSource
from ..pipeline import SampleResult

BIN_EDGES = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


def bin_index(value: float, edges: Sequence[float] = BIN_EDGES) -> int:
    """
    Bin of ``value``: [0, .2), [.2, .4), [.4, .6), [.6, .8) and the closed [.8, 1].

    Five bins over a six-point sweep, so certainties 0.8 and 1.0 share the
    last column.
    """
    return int(np.digitize(value, edges[1:-1], right=False))


@dataclass(frozen=True)
class Heatmap:
    """
    Mean deviation per (self-confidence bin, certainty bin).

    Rows are self-confidence bins and columns certainty bins. Empty bins
    hold None rather than zero.
    """

    edges: Tuple[float, ...]
    means: Tuple[Tuple[Optional[float], ...], ...]
    counts: Tuple[Tuple[int, ...], ...]

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.means), len(self.means[0])

    def row_argmax(self, row: int) -> Optional[int]:
        """Certainty bin with the highest mean deviation in ``row``; None if the row is empty."""
        cells = [(v, j) for j, v in enumerate(self.means[row]) if v is not None]
        if not cells:
            return None
        best = max(v for v, _ in cells)
        return min(j for v, j in cells if v == best)


def heatmap(results: Sequence[SampleResult], edges: Sequence[float] = BIN_EDGES) -> Heatmap:
    """Bin every (self-confidence, grid certainty) deviation of the unflagged results."""
    included = [r for r in results if not r.flagged]
    if not included:
        raise ContractError("no unflagged results to bin", source=ErrorSource.REPORT)
    size = len(edges) - 1
    totals = np.zeros((size, size))
    counts = np.zeros((size, size), dtype=int)
    for result in included:
        if result.self_confidence is None:
            raise ContractError(f"sample {result.sample_id!r} has no self-confidence",
                                source=ErrorSource.REPORT)
        row = bin_index(result.self_confidence, edges)
        for c, deviation in result.record.deviation_curve():
            col = bin_index(c, edges)
            totals[row, col] += deviation
            counts[row, col] += 1

    means = tuple(
        tuple(float(totals[i, j] / counts[i, j]) if counts[i, j] else None for j in range(size))
        for i in range(size)
    )
    return Heatmap(
        edges=tuple(float(e) for e in edges),
        means=means,
        counts=tuple(tuple(int(v) for v in row) for row in counts),
    )
