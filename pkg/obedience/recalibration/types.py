"""
Recalibration value types.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Sequence, Tuple

import numpy as np

from ..errors import ContractError, ErrorSource
from ..prob import Certainty, CertaintyLike, CertaintySweep
from ..prob.metrics import CURVE_TOLERANCE


@dataclass(frozen=True)
class TvdGrid:
    """
    ``values[i][j]`` is the TVD between the response at expressed certainty
    ``grid[i]`` and the ideal response at target certainty ``grid[j]``.
    """

    sweep: CertaintySweep
    values: Tuple[Tuple[float, ...], ...]
    sample_id: str = ""
    category: str = ""

    def __post_init__(self) -> None:
        n = len(self.sweep)
        rows = tuple(tuple(float(v) for v in row) for row in self.values)
        if len(rows) != n or any(len(row) != n for row in rows):
            raise ContractError(f"a TVD grid over {n} certainties must be {n}x{n}",
                                source=ErrorSource.RECALIBRATION)
        if any(v < -CURVE_TOLERANCE or v > 1 + CURVE_TOLERANCE for row in rows for v in row):
            raise ContractError("TVD grid entries must lie in [0, 1]", source=ErrorSource.RECALIBRATION)
        object.__setattr__(self, "values", rows)

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @classmethod
    def from_matrix(cls, sweep: CertaintySweep, matrix: Sequence[Sequence[float]], sample_id: str = "",
                    category: str = "") -> "TvdGrid":
        return cls(sweep, tuple(tuple(row) for row in np.asarray(matrix, dtype=float).tolist()),
                   sample_id, category)


@dataclass(frozen=True)
class RecalibrationMap:
    """
    Lookup from target certainty to the certainty that should be expressed
    in the prompt, defined on every point of its sweep.
    """

    sweep: CertaintySweep
    expressed: Tuple[float, ...]
    categories: Tuple[str, ...] = ()
    sample_count: int = 0
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        expressed = tuple(float(c) for c in self.expressed)
        if len(expressed) != len(self.sweep):
            raise ContractError("recalibration map must cover every grid point",
                                source=ErrorSource.RECALIBRATION)
        snapped = tuple(self.sweep.grid[self.sweep.index_of(c)] for c in expressed)
        object.__setattr__(self, "expressed", snapped)
        object.__setattr__(self, "categories", tuple(self.categories))

    @classmethod
    def identity(cls, sweep: CertaintySweep) -> "RecalibrationMap":
        return cls(sweep, sweep.grid)

    @property
    def endpoint_violations(self) -> Tuple[str, ...]:
        """Endpoints the fit did not map to themselves."""
        violations = []
        if self.expressed[0] != 0.0:
            violations.append(f"Cal(0)={self.expressed[0]:g}")
        if self.expressed[-1] != 1.0:
            violations.append(f"Cal(1)={self.expressed[-1]:g}")
        return tuple(violations)

    def is_identity(self) -> bool:
        return self.expressed == self.sweep.grid

    def pairs(self) -> Tuple[Tuple[float, float], ...]:
        """(target, expressed) pairs in grid order."""
        return tuple(zip(self.sweep.grid, self.expressed))

    def lookup(self, c: CertaintyLike) -> Certainty:
        return Certainty(self.expressed[self.sweep.index_of(float(Certainty.of(c)))])
