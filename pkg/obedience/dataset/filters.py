"""
Sample selection: the retrieval-success filter, correctness splits and the
category filter.
"""

from typing import Callable, Dict, List, Mapping, Sequence, Tuple

import structlog

from ..errors import ContractError, ErrorSource
from .normalize import normalize_answer
from .types import FilterReport, Sample

logger = structlog.get_logger(__name__)

SPORTS_CATEGORIES = frozenset({"sports records", "sports", "records"})


def retrieval_filter(
    samples: Sequence[Sample],
    extracted: Mapping[str, Mapping[str, str]],
    match: Callable[[str], str] = normalize_answer,
) -> FilterReport:
    """
    Keep the samples whose context answer every backend extracted correctly.

    ``extracted`` maps backend name to a map from sample id to the answer
    that backend extracted from the context.
    """
    if not extracted:
        raise ContractError("retrieval_filter needs at least one backend", source=ErrorSource.DATASET)
    rates: Dict[str, float] = {}
    failures: Dict[str, Tuple[str, ...]] = {}
    failed_any = set()
    for backend in sorted(extracted):
        answers = extracted[backend]
        missing = [s.id for s in samples if s.id not in answers]
        if missing:
            raise ContractError(
                f"backend {backend!r} has no extraction for {len(missing)} sample(s), e.g. {missing[0]!r}",
                source=ErrorSource.DATASET,
            )
        failed = tuple(s.id for s in samples if match(answers[s.id]) != match(s.context_answer))
        failures[backend] = failed
        failed_any.update(failed)
        rates[backend] = 100.0 * (len(samples) - len(failed)) / len(samples) if samples else 100.0
    survivors = tuple(s.id for s in samples if s.id not in failed_any)
    logger.info("dataset.filtered", total=len(samples), survivors=len(survivors), rates=rates)
    return FilterReport(rates=rates, survivors=survivors, total=len(samples), failures=failures)


def select(samples: Sequence[Sample], ids: Sequence[str]) -> List[Sample]:
    """Samples whose id is in ``ids``, in dataset order."""
    keep = set(ids)
    return [s for s in samples if s.id in keep]


def correctness_split(samples: Sequence[Sample]) -> Tuple[List[Sample], List[Sample]]:
    """Partition into (correct-context, wrong-context) subsets, preserving order."""
    correct: List[Sample] = []
    wrong: List[Sample] = []
    for sample in samples:
        flag = sample.context_is_correct
        if flag is None:
            raise ContractError(f"sample {sample.id!r} has no gold answer", source=ErrorSource.DATASET)
        (correct if flag else wrong).append(sample)
    return correct, wrong


def filter_categories(samples: Sequence[Sample], include_sports: bool = False) -> List[Sample]:
    """Drop the sports-records category unless asked to keep it."""
    if include_sports:
        return list(samples)
    return [s for s in samples if s.category.strip().casefold() not in SPORTS_CATEGORIES]
