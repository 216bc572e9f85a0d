"""
Exact finite-distribution arithmetic: TVD, ideal mixture, curve metrics and
the area-under-curve obedience error.
"""

from .distribution import (
    NORMALIZATION_TOLERANCE,
    Certainty,
    CertaintyLike,
    CertaintySweep,
    Distribution,
)
from .metrics import (
    DiagnosticPoint,
    ObedienceRecord,
    diagnostic_point,
    ideal_mixture,
    merge_outcomes,
    obedience_error,
    tvd,
)

__all__ = [
    "NORMALIZATION_TOLERANCE",
    "Certainty",
    "CertaintyLike",
    "CertaintySweep",
    "Distribution",
    "DiagnosticPoint",
    "ObedienceRecord",
    "diagnostic_point",
    "ideal_mixture",
    "merge_outcomes",
    "obedience_error",
    "tvd",
]
