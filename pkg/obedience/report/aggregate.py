"""
Mean curves over a result set.

Flagged samples (failed, degenerate or carrying diagnostics) are left out of
every curve alike and listed in ``excluded``.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..dataset import Sample, correctness_split
from ..errors import ContractError, ErrorSource
from ..pipeline import SampleResult
from ..prob import CertaintySweep, obedience_error

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class AggregateCurves:
    """
    Per-grid-point means over the included samples.

    ``ideal_ctx`` and ``ideal_prior`` are the similarities an ideal mixture
    would reach, averaged over each sample's own prior mass on the context
    answer. ``abs_ctx_error`` and ``abs_prior_error`` average the absolute
    gap to those ideals, so opposing errors do not cancel.
    """

    sweep: CertaintySweep
    sim_ctx: Tuple[float, ...]
    sim_prior: Tuple[float, ...]
    deviation: Tuple[float, ...]
    ideal_ctx: Tuple[float, ...]
    ideal_prior: Tuple[float, ...]
    abs_ctx_error: Tuple[float, ...]
    abs_prior_error: Tuple[float, ...]
    n: int
    sample_ids: Tuple[str, ...]
    excluded: Tuple[str, ...] = ()
    mean_epsilon: float = 0.0

    @property
    def epsilon_obey(self) -> float:
        """Obedience error of the mean deviation curve."""
        return obedience_error(list(zip(self.sweep.grid, self.deviation)))


def ideal_similarities(sweep: CertaintySweep, prior_answer_mass: float) -> Tuple[np.ndarray, np.ndarray]:
    """Similarity to context and to prior of the ideal mixture at every grid point."""
    c = np.asarray(sweep.grid, dtype=float)
    gap = 1.0 - float(prior_answer_mass)
    return 1.0 - (1.0 - c) * gap, 1.0 - c * gap


def _mean(rows: List[np.ndarray]) -> Tuple[float, ...]:
    return tuple(float(v) for v in np.mean(np.vstack(rows), axis=0))


def aggregate(results: Sequence[SampleResult]) -> AggregateCurves:
    """Pointwise means over every unflagged result; all must share one sweep."""
    if not results:
        raise ContractError("cannot aggregate an empty result set", source=ErrorSource.REPORT)
    included = [r for r in results if not r.flagged]
    excluded = tuple(r.sample_id for r in results if r.flagged)
    if not included:
        raise ContractError("every result is flagged; nothing to aggregate", source=ErrorSource.REPORT)

    sweep = included[0].record.sweep
    rows = {name: [] for name in ("sim_ctx", "sim_prior", "deviation", "ideal_ctx", "ideal_prior",
                                  "abs_ctx", "abs_prior")}
    for result in included:
        record = result.record
        if record.sweep != sweep:
            raise ContractError(f"sample {result.sample_id!r} uses a different sweep", source=ErrorSource.REPORT)
        if result.prior_answer_mass is None:
            raise ContractError(f"sample {result.sample_id!r} has no prior answer mass",
                                source=ErrorSource.REPORT)
        ideal_ctx, ideal_prior = ideal_similarities(sweep, result.prior_answer_mass)
        sim_ctx = np.asarray(record.sim_to_context)
        sim_prior = np.asarray(record.sim_to_prior)
        rows["sim_ctx"].append(sim_ctx)
        rows["sim_prior"].append(sim_prior)
        rows["deviation"].append(np.asarray(record.deviation))
        rows["ideal_ctx"].append(ideal_ctx)
        rows["ideal_prior"].append(ideal_prior)
        rows["abs_ctx"].append(np.abs(sim_ctx - ideal_ctx))
        rows["abs_prior"].append(np.abs(sim_prior - ideal_prior))

    curves = AggregateCurves(
        sweep=sweep,
        sim_ctx=_mean(rows["sim_ctx"]),
        sim_prior=_mean(rows["sim_prior"]),
        deviation=_mean(rows["deviation"]),
        ideal_ctx=_mean(rows["ideal_ctx"]),
        ideal_prior=_mean(rows["ideal_prior"]),
        abs_ctx_error=_mean(rows["abs_ctx"]),
        abs_prior_error=_mean(rows["abs_prior"]),
        n=len(included),
        sample_ids=tuple(r.sample_id for r in included),
        excluded=excluded,
        mean_epsilon=float(np.mean([r.record.epsilon_obey for r in included])),
    )
    if excluded:
        logger.info("report.excluded", count=len(excluded), samples=list(excluded))
    return curves


def split_by_correctness(
    results: Sequence[SampleResult], samples: Sequence[Sample]
) -> Tuple[Optional[AggregateCurves], Optional[AggregateCurves]]:
    """
    Aggregate correct-context and wrong-context samples separately.

    A side with no results comes back as None.
    """
    correct, wrong = correctness_split(samples)
    by_id = {r.sample_id: r for r in results}

    def side(subset: Sequence[Sample]) -> Optional[AggregateCurves]:
        chosen = [by_id[s.id] for s in subset if s.id in by_id]
        if not chosen or all(r.flagged for r in chosen):
            return None
        return aggregate(chosen)

    return side(correct), side(wrong)
