"""
Finite probability distributions and certainty values.

A ``Distribution`` is an immutable pair of an ordered outcome list and a
mass per outcome. Outcomes are opaque hashable labels; two distributions
can only be compared when their outcome lists are identical.
"""

import math
from dataclasses import dataclass, field, InitVar
from typing import Hashable, Iterator, Mapping, Sequence, Tuple, Union

import numpy as np

from ..errors import AlignmentError, ContractError, ErrorCode, ErrorSource, ObedienceError

NORMALIZATION_TOLERANCE = 1e-6
GRID_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Distribution:
    """
    Probability mass over an ordered, duplicate-free list of outcomes.

    Masses must sum to 1 within ``NORMALIZATION_TOLERANCE``; accepted inputs
    are then rescaled so the stored masses sum to 1. Pass ``normalize=False``
    for values that are already exact combinations of normalized inputs.
    """

    outcomes: Tuple[Hashable, ...]
    masses: Tuple[float, ...]
    normalize: InitVar[bool] = True

    def __post_init__(self, normalize: bool) -> None:
        outcomes = tuple(self.outcomes)
        masses = tuple(float(m) for m in self.masses)
        if len(outcomes) != len(masses):
            raise ContractError(
                f"{len(outcomes)} outcomes but {len(masses)} masses", source=ErrorSource.PROB
            )
        if not outcomes:
            raise ContractError("distribution needs at least one outcome", source=ErrorSource.PROB)
        if len(set(outcomes)) != len(outcomes):
            raise ContractError("outcome identifiers must be unique", source=ErrorSource.PROB)
        if any(m < 0 or math.isnan(m) for m in masses):
            raise ObedienceError(
                ErrorCode.NOT_NORMALIZED, "masses must be non-negative", source=ErrorSource.PROB
            )
        total = math.fsum(masses)
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise ObedienceError(
                ErrorCode.NOT_NORMALIZED,
                f"masses sum to {total!r}, expected 1 within {NORMALIZATION_TOLERANCE}",
                source=ErrorSource.PROB,
            )
        if normalize and total != 1.0:
            masses = tuple(m / total for m in masses)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_mapping(cls, mass: Mapping[Hashable, float]) -> "Distribution":
        """Build a distribution from an insertion-ordered mapping."""
        return cls(tuple(mass.keys()), tuple(mass.values()))

    @classmethod
    def point_mass(cls, outcomes: Sequence[Hashable], at: Hashable) -> "Distribution":
        """Degenerate distribution with all mass on ``at``."""
        if at not in outcomes:
            raise ContractError(f"{at!r} is not an outcome", source=ErrorSource.PROB)
        return cls(tuple(outcomes), tuple(1.0 if o == at else 0.0 for o in outcomes))

    @classmethod
    def uniform(cls, outcomes: Sequence[Hashable]) -> "Distribution":
        n = len(outcomes)
        return cls(tuple(outcomes), tuple(1.0 / n for _ in outcomes))

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.masses, dtype=float)

    def mass_of(self, outcome: Hashable) -> float:
        try:
            return self.masses[self.outcomes.index(outcome)]
        except ValueError:
            raise ContractError(f"{outcome!r} is not an outcome", source=ErrorSource.PROB)

    def is_point_mass(self) -> bool:
        return sum(1 for m in self.masses if m == 1.0) == 1 and all(
            m in (0.0, 1.0) for m in self.masses
        )

    def same_support(self, other: "Distribution") -> bool:
        return self.outcomes == other.outcomes

    def require_same_support(self, other: "Distribution") -> None:
        if not self.same_support(other):
            raise AlignmentError(
                "distributions are defined on different outcome lists; "
                "align the traces before comparing them"
            )

    def __len__(self) -> int:
        return len(self.outcomes)


@dataclass(frozen=True, order=True)
class Certainty:
    """A context certainty in [0, 1], displayed as an integer percent."""

    value: float

    def __post_init__(self) -> None:
        value = float(self.value)
        if math.isnan(value) or not 0.0 <= value <= 1.0:
            raise ContractError(f"certainty {self.value!r} outside [0, 1]", source=ErrorSource.PROB)
        object.__setattr__(self, "value", value)

    @classmethod
    def of(cls, value: Union["Certainty", float]) -> "Certainty":
        return value if isinstance(value, Certainty) else cls(float(value))

    @classmethod
    def from_percent(cls, percent: Union[int, float]) -> "Certainty":
        return cls(percent / 100)

    @property
    def percent(self) -> int:
        return int(round(self.value * 100))

    def is_integer_percent(self) -> bool:
        return abs(self.value * 100 - self.percent) <= GRID_TOLERANCE * 100

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        return f"{self.percent}%"


CertaintyLike = Union[Certainty, float]


@dataclass(frozen=True)
class CertaintySweep:
    """Strictly increasing certainty grid spanning [0, 1]."""

    grid: Tuple[float, ...] = field(default=(0.0, 0.2, 0.4, 0.6, 0.8, 1.0))

    def __post_init__(self) -> None:
        grid = tuple(float(Certainty.of(c)) for c in self.grid)
        if len(grid) < 2:
            raise ContractError("a sweep needs at least two points", source=ErrorSource.PROB)
        if grid[0] != 0.0 or grid[-1] != 1.0:
            raise ContractError("a sweep must start at 0 and end at 1", source=ErrorSource.PROB)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ContractError("sweep must be strictly increasing", source=ErrorSource.PROB)
        object.__setattr__(self, "grid", grid)

    @classmethod
    def default(cls) -> "CertaintySweep":
        return cls()

    @classmethod
    def from_step(cls, percent_step: int) -> "CertaintySweep":
        if percent_step <= 0 or 100 % percent_step:
            raise ContractError("percent step must divide 100", source=ErrorSource.PROB)
        return cls(tuple(p / 100 for p in range(0, 101, percent_step)))

    @classmethod
    def parse(cls, text: str) -> "CertaintySweep":
        """
        Parse a comma list such as ``"0,20,40,60,80,100"`` or ``"0,0.5,1"``.

        A list whose largest value exceeds 1 is read as percents.
        """
        try:
            values = [float(part) for part in text.split(",") if part.strip()]
        except ValueError as exc:
            raise ContractError(f"invalid sweep {text!r}", source=ErrorSource.CONFIG, cause=exc)
        if values and max(values) > 1:
            values = [v / 100 for v in values]
        return cls(tuple(values))

    def __iter__(self) -> Iterator[float]:
        return iter(self.grid)

    def __len__(self) -> int:
        return len(self.grid)

    def index_of(self, c: CertaintyLike) -> int:
        value = float(c)
        for i, point in enumerate(self.grid):
            if abs(point - value) <= GRID_TOLERANCE:
                return i
        raise ContractError(f"certainty {value!r} is not on the sweep grid", source=ErrorSource.PROB)

    def contains(self, c: CertaintyLike) -> bool:
        return any(abs(point - float(c)) <= GRID_TOLERANCE for point in self.grid)
