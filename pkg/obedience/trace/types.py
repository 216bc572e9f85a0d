"""
Teacher-forced token traces.

A ``ScoredTrace`` records, for every token of a forced answer, the
probability of that token and of the alternatives the backend reported.
Probabilities are held as log-probabilities; the properties expose them in
linear space.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, NamedTuple, Optional, Sequence, Tuple

from ..errors import ContractError, ErrorCode, ErrorSource, ObedienceError
from ..prob import NORMALIZATION_TOLERANCE

# endpoints round logprobs (often to 4 decimals), so top-k mass can overshoot 1
WIRE_ROUNDING_TOLERANCE = 1e-3


def _log(p: float) -> float:
    return math.log(p) if p > 0 else float("-inf")


class Outcome(NamedTuple):
    """Label of one cell of the deviation-event partition."""

    kind: str  # "full" | "deviate" | "other"
    step: int = -1
    token: str = ""

    def __str__(self) -> str:
        if self.kind == "full":
            return "FULL"
        if self.kind == "deviate":
            return f"DEVIATE({self.step},{self.token})"
        return f"OTHER({self.step})"


FULL_ANSWER = Outcome("full")


def deviate(step: int, token: str) -> Outcome:
    return Outcome("deviate", step, token)


def deviate_other(step: int) -> Outcome:
    return Outcome("other", step)


@dataclass(frozen=True)
class TokenStep:
    """Stepwise probabilities at one forced position."""

    forced_token: str
    forced_logprob: float
    alternative_logprobs: Tuple[Tuple[str, float], ...] = ()
    residual: float = 0.0

    def __post_init__(self) -> None:
        alternatives = tuple(sorted((str(t), float(lp)) for t, lp in self.alternative_logprobs))
        object.__setattr__(self, "alternative_logprobs", alternatives)
        object.__setattr__(self, "forced_logprob", float(self.forced_logprob))
        object.__setattr__(self, "residual", float(self.residual))
        names = [t for t, _ in alternatives]
        if len(set(names)) != len(names):
            raise ContractError("duplicate alternative token", source=ErrorSource.TRACE)
        if self.forced_token in names:
            raise ContractError(
                f"forced token {self.forced_token!r} listed as an alternative", source=ErrorSource.TRACE
            )
        if self.forced_logprob > 0 or any(lp > 0 for _, lp in alternatives):
            raise ContractError("log-probabilities must be <= 0", source=ErrorSource.TRACE)
        if self.residual < 0:
            raise ContractError("residual mass must be >= 0", source=ErrorSource.TRACE)
        total = self.forced_prob + sum(self.alternatives.values()) + self.residual
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise ObedienceError(
                ErrorCode.NOT_NORMALIZED,
                f"step mass sums to {total!r}",
                source=ErrorSource.TRACE,
            )

    @classmethod
    def from_probs(
        cls,
        forced_token: str,
        forced_prob: float,
        alternatives: Optional[Mapping[str, float]] = None,
        residual: Optional[float] = None,
    ) -> "TokenStep":
        """Build a step from linear probabilities; a missing residual is the unreported remainder."""
        alternatives = dict(alternatives or {})
        if residual is None:
            residual = max(0.0, 1.0 - forced_prob - sum(alternatives.values()))
        return cls(
            forced_token=forced_token,
            forced_logprob=_log(forced_prob),
            alternative_logprobs=tuple((t, _log(p)) for t, p in alternatives.items()),
            residual=residual,
        )

    @classmethod
    def from_logprobs(
        cls,
        forced_token: str,
        forced_logprob: float,
        top_logprobs: Optional[Mapping[str, float]] = None,
    ) -> "TokenStep":
        """
        Build a step from wire log-probabilities.

        ``top_logprobs`` may contain the forced token; it is dropped from the
        alternatives. Unreported vocabulary mass becomes the residual.
        Reported mass that exceeds 1 by no more than ``WIRE_ROUNDING_TOLERANCE``
        is rounding on the wire and is renormalized.
        """
        alternatives = {t: lp for t, lp in (top_logprobs or {}).items() if t != forced_token}
        reported = math.exp(forced_logprob) + sum(math.exp(lp) for lp in alternatives.values())
        if 1.0 < reported <= 1.0 + WIRE_ROUNDING_TOLERANCE:
            shift = math.log(reported)
            forced_logprob -= shift
            alternatives = {t: lp - shift for t, lp in alternatives.items()}
            reported = 1.0
        return cls(
            forced_token=forced_token,
            forced_logprob=forced_logprob,
            alternative_logprobs=tuple(alternatives.items()),
            residual=max(0.0, 1.0 - reported),
        )

    @property
    def forced_prob(self) -> float:
        return math.exp(self.forced_logprob)

    @property
    def alternatives(self) -> Dict[str, float]:
        return {t: math.exp(lp) for t, lp in self.alternative_logprobs}

    @property
    def named_tokens(self) -> Tuple[str, ...]:
        return tuple(t for t, _ in self.alternative_logprobs)

    def restrict(self, keep: Sequence[str]) -> "TokenStep":
        """Coarsen the step: alternatives outside ``keep`` are folded into the residual."""
        kept = set(keep)
        folded = sum(math.exp(lp) for t, lp in self.alternative_logprobs if t not in kept)
        if folded == 0.0 and all(t in kept for t in self.named_tokens):
            return self
        return TokenStep(
            forced_token=self.forced_token,
            forced_logprob=self.forced_logprob,
            alternative_logprobs=tuple((t, lp) for t, lp in self.alternative_logprobs if t in kept),
            residual=self.residual + folded,
        )


@dataclass(frozen=True)
class ScoredTrace:
    """Stepwise probabilities recorded while teacher-forcing an answer under one prompt."""

    answer_tokens: Tuple[str, ...]
    steps: Tuple[TokenStep, ...]
    condition_label: str = field(default="")

    def __post_init__(self) -> None:
        object.__setattr__(self, "answer_tokens", tuple(self.answer_tokens))
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.answer_tokens:
            raise ContractError("a trace needs at least one answer token", source=ErrorSource.TRACE)
        if len(self.steps) != len(self.answer_tokens):
            raise ContractError(
                f"{len(self.steps)} steps for {len(self.answer_tokens)} answer tokens",
                source=ErrorSource.TRACE,
            )
        for t, (token, step) in enumerate(zip(self.answer_tokens, self.steps)):
            if step.forced_token != token:
                raise ContractError(
                    f"step {t} forces {step.forced_token!r}, answer token is {token!r}",
                    source=ErrorSource.TRACE,
                )

    @property
    def log_likelihood(self) -> float:
        return sum(step.forced_logprob for step in self.steps)

    @property
    def answer_probability(self) -> float:
        """Chain-rule probability of the full answer."""
        return math.exp(self.log_likelihood)

    def relabel(self, condition_label: str) -> "ScoredTrace":
        return ScoredTrace(self.answer_tokens, self.steps, condition_label)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "answer_tokens": list(self.answer_tokens),
            "condition": self.condition_label,
            "steps": [
                {
                    "token": step.forced_token,
                    "logprob": step.forced_logprob,
                    "alternatives": [[t, lp] for t, lp in step.alternative_logprobs],
                    "residual": step.residual,
                }
                for step in self.steps
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScoredTrace":
        steps = tuple(
            TokenStep(
                forced_token=step["token"],
                forced_logprob=float(step["logprob"]),
                alternative_logprobs=tuple((t, float(lp)) for t, lp in step.get("alternatives", ())),
                residual=float(step.get("residual", 0.0)),
            )
            for step in data["steps"]
        )
        return cls(tuple(data["answer_tokens"]), steps, data.get("condition", ""))
