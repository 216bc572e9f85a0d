"""
Teacher-forced traces and the prefix distributions built from them.
"""

from .prefix import (
    PrefixDistribution,
    align_steps,
    build_prefix_distribution,
    point_mass_answer,
    point_mass_trace,
)
from .types import (
    FULL_ANSWER,
    WIRE_ROUNDING_TOLERANCE,
    Outcome,
    ScoredTrace,
    TokenStep,
    deviate,
    deviate_other,
)

__all__ = [
    "FULL_ANSWER",
    "WIRE_ROUNDING_TOLERANCE",
    "Outcome",
    "ScoredTrace",
    "TokenStep",
    "deviate",
    "deviate_other",
    "PrefixDistribution",
    "align_steps",
    "build_prefix_distribution",
    "point_mass_answer",
    "point_mass_trace",
]
