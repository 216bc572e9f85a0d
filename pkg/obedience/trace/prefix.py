"""
Prefix distributions built from teacher-forced traces.

The outcome space is the deviation-event partition induced by the forced
answer: the full answer, or the first step at which generation departs from
it (to a named token or to the unreported remainder). Step probabilities are
chained in log space and exponentiated only when masses are assembled.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import structlog

from ..errors import AlignmentError, ContractError, DegenerateTraceError, ErrorSource
from ..prob import Distribution
from .types import FULL_ANSWER, Outcome, ScoredTrace, TokenStep, deviate, deviate_other

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class PrefixDistribution(Distribution):
    """A distribution over the deviation-event partition of one answer."""

    @property
    def full_answer_mass(self) -> float:
        return self.mass_of(FULL_ANSWER)


def align_steps(traces: Sequence[ScoredTrace]) -> List[ScoredTrace]:
    """
    Put traces on a common partition.

    At every step the named alternatives become the intersection of the
    named sets across all traces; mass of dropped names moves to the residual.
    """
    traces = list(traces)
    if len(traces) <= 1:
        return traces
    answer = traces[0].answer_tokens
    for trace in traces[1:]:
        if trace.answer_tokens != answer:
            raise AlignmentError(
                f"cannot align traces of different answers: {answer!r} vs {trace.answer_tokens!r}",
                source=ErrorSource.TRACE,
            )
    shared = []
    for t in range(len(answer)):
        names = set(traces[0].steps[t].named_tokens)
        for trace in traces[1:]:
            names &= set(trace.steps[t].named_tokens)
        shared.append(sorted(names))
    return [
        ScoredTrace(
            trace.answer_tokens,
            tuple(step.restrict(shared[t]) for t, step in enumerate(trace.steps)),
            trace.condition_label,
        )
        for trace in traces
    ]


def build_prefix_distribution(trace: ScoredTrace) -> PrefixDistribution:
    """
    Chain-rule proxy distribution of a trace.

    Raises ``DegenerateTraceError`` when a forced token has zero probability,
    since the answer is then unreachable and the partition carries no mass
    past that step.
    """
    outcomes: List[Outcome] = [FULL_ANSWER]
    masses: List[float] = [0.0]
    log_prefix = 0.0
    for t, step in enumerate(trace.steps):
        if step.forced_logprob == float("-inf"):
            logger.warning("trace.degenerate", step=t, condition=trace.condition_label)
            raise DegenerateTraceError(
                f"forced token {step.forced_token!r} has zero probability under "
                f"condition {trace.condition_label!r}",
                step=t,
            )
        for token, logprob in step.alternative_logprobs:
            outcomes.append(deviate(t, token))
            masses.append(math.exp(log_prefix + logprob))
        outcomes.append(deviate_other(t))
        masses.append(math.exp(log_prefix) * step.residual)
        log_prefix += step.forced_logprob
    masses[0] = math.exp(log_prefix)
    return PrefixDistribution(tuple(outcomes), tuple(masses))


def point_mass_trace(trace: ScoredTrace) -> ScoredTrace:
    """The trace of a model that emits the answer with certainty, on ``trace``'s partition."""
    return ScoredTrace(
        trace.answer_tokens,
        tuple(
            TokenStep(
                forced_token=step.forced_token,
                forced_logprob=0.0,
                alternative_logprobs=tuple((t, float("-inf")) for t in step.named_tokens),
                residual=0.0,
            )
            for step in trace.steps
        ),
        "context",
    )


def point_mass_answer(
    answer_tokens: Sequence[str], like: Optional[Distribution] = None
) -> PrefixDistribution:
    """
    The point mass on the full answer.

    With ``like`` the mass is laid on that distribution's outcome list;
    otherwise on the minimal partition (full answer plus one remainder
    outcome per step).
    """
    if not answer_tokens:
        raise ContractError("answer must have at least one token", source=ErrorSource.TRACE)
    if like is not None:
        outcomes = tuple(like.outcomes)
        if FULL_ANSWER not in outcomes:
            raise AlignmentError("partition has no full-answer outcome", source=ErrorSource.TRACE)
    else:
        outcomes = (FULL_ANSWER,) + tuple(deviate_other(t) for t in range(len(answer_tokens)))
    return PrefixDistribution(
        outcomes, tuple(1.0 if o == FULL_ANSWER else 0.0 for o in outcomes)
    )
