"""
Per-sample orchestration: prior elicitation, context transformation,
certainty sweep, caching and result persistence.
"""

from .cache import CachedBackend, ResponseCache
from .runner import Pipeline, clean_answer
from .store import CURVE_COLUMNS, ResultStore, explained_agreement, restrict_results, same_answer_ids
from .types import RunConfig, SampleResult, SweepDistributions

__all__ = [
    "CURVE_COLUMNS",
    "CachedBackend",
    "Pipeline",
    "ResponseCache",
    "ResultStore",
    "RunConfig",
    "SampleResult",
    "SweepDistributions",
    "clean_answer",
    "explained_agreement",
    "restrict_results",
    "same_answer_ids",
]
