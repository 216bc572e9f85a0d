"""
Backend value types: generations and the synthetic model specification.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import ContractError, ErrorSource
from ..prob import CertaintyLike, Certainty, Distribution

DISTORTIONS = ("identity", "square", "sqrt", "piecewise")


@dataclass(frozen=True)
class Generation:
    """A greedy completion and the log-probabilities of its emitted tokens."""

    text: str
    token_logprobs: Tuple[float, ...] = ()

    @property
    def probability(self) -> Optional[float]:
        """Chain-rule probability of the emitted tokens, or None when unreported."""
        if not self.token_logprobs:
            return None
        return math.exp(math.fsum(self.token_logprobs))


def _closed_form(name: str) -> Callable[[float], float]:
    return {
        "identity": lambda c: c,
        "square": lambda c: c * c,
        "sqrt": math.sqrt,
    }[name]


@dataclass(frozen=True)
class SyntheticModelSpec:
    """
    A model whose response at certainty ``c`` is ``(1 - g(c)) * prior + g(c) * point(a)``.

    ``prior`` lists the vocabulary in order with its context-free mass.
    ``distortion`` selects ``g``; ``piecewise`` interpolates linearly between
    ``knots`` given as ``(c, g(c))`` pairs.
    """

    prior: Tuple[Tuple[str, float], ...]
    distortion: str = "identity"
    knots: Tuple[Tuple[float, float], ...] = field(default=())

    def __post_init__(self) -> None:
        prior = tuple((str(token), float(mass)) for token, mass in self.prior)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "knots", tuple((float(x), float(y)) for x, y in self.knots))
        if self.distortion not in DISTORTIONS:
            raise ContractError(
                f"unknown distortion {self.distortion!r}; expected one of {DISTORTIONS}",
                source=ErrorSource.BACKEND,
            )
        for token, _ in prior:
            if not token or any(ch.isspace() for ch in token):
                raise ContractError(
                    f"vocabulary token {token!r} must be a single non-empty word",
                    source=ErrorSource.BACKEND,
                )
        # validates uniqueness and normalization
        Distribution(self.vocabulary, tuple(m for _, m in prior))
        if self.distortion == "piecewise":
            xs = [x for x, _ in self.knots]
            if len(xs) < 2 or xs[0] != 0.0 or xs[-1] != 1.0 or any(b <= a for a, b in zip(xs, xs[1:])):
                raise ContractError(
                    "piecewise knots must start at 0, end at 1 and increase strictly",
                    source=ErrorSource.BACKEND,
                )
            if any(not 0.0 <= y <= 1.0 for _, y in self.knots):
                raise ContractError("piecewise values must lie in [0, 1]", source=ErrorSource.BACKEND)
            if self.knots[0][1] != 0.0 or self.knots[-1][1] != 1.0:
                raise ContractError("piecewise distortion must satisfy g(0)=0 and g(1)=1",
                                    source=ErrorSource.BACKEND)

    @classmethod
    def from_mapping(cls, prior: Mapping[str, float], distortion: str = "identity",
                     knots: Sequence[Tuple[float, float]] = ()) -> "SyntheticModelSpec":
        return cls(tuple(prior.items()), distortion, tuple(knots))

    @property
    def vocabulary(self) -> Tuple[str, ...]:
        return tuple(token for token, _ in self.prior)

    @property
    def prior_distribution(self) -> Distribution:
        return Distribution(self.vocabulary, tuple(m for _, m in self.prior))

    def distort(self, c: CertaintyLike) -> float:
        """The distortion ``g`` evaluated at ``c``."""
        value = float(Certainty.of(c))
        if self.distortion == "piecewise":
            xs, ys = zip(*self.knots)
            return float(np.interp(value, xs, ys))
        return _closed_form(self.distortion)(value)

    def most_likely(self, distribution: Optional[Distribution] = None) -> str:
        """Greedy token of ``distribution`` (the prior by default); ties go to the smallest token."""
        distribution = distribution or self.prior_distribution
        return min(zip(distribution.outcomes, distribution.masses), key=lambda om: (-om[1], om[0]))[0]


BUILTIN_PRIOR = (("Paris", 0.8), ("Lyon", 0.2))

BUILTIN_SPECS: Dict[str, SyntheticModelSpec] = {
    "identity": SyntheticModelSpec(BUILTIN_PRIOR, "identity"),
    "square": SyntheticModelSpec(BUILTIN_PRIOR, "square"),
    "sqrt": SyntheticModelSpec(BUILTIN_PRIOR, "sqrt"),
}
