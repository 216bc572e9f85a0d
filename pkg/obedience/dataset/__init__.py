"""
Retrieval-augmented QA samples: loading, the retrieval-success filter and
analysis splits.
"""

from .filters import SPORTS_CATEGORIES, correctness_split, filter_categories, retrieval_filter, select
from .io import dataset_hash, dump, load, parse_record
from .normalize import normalize_answer
from .types import FilterReport, Sample

__all__ = [
    "FilterReport",
    "SPORTS_CATEGORIES",
    "Sample",
    "correctness_split",
    "dataset_hash",
    "dump",
    "filter_categories",
    "load",
    "normalize_answer",
    "parse_record",
    "retrieval_filter",
    "select",
]
