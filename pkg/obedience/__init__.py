"""
Obedience

Measures how faithfully a language model follows the certainty attached to a
retrieved context, and the interaction strategies that improve it.
"""

__version__ = "0.1.0"

from .backend import Backend, CompletionBackend, SyntheticBackend, build_backend
from .core.config import BackendConfig, GenerationParams
from .dataset import Sample, load as load_dataset
from .pipeline import Pipeline, RunConfig, SampleResult
from .prob import CertaintySweep, Distribution, ideal_mixture, obedience_error, tvd
from .prompts import PromptMode
from .recalibration import RecalibrationMap, fit as fit_recalibration
from .report import AggregateCurves, aggregate

__all__ = [
    "Backend",
    "CompletionBackend",
    "SyntheticBackend",
    "build_backend",
    "BackendConfig",
    "GenerationParams",
    "Sample",
    "load_dataset",
    "Pipeline",
    "RunConfig",
    "SampleResult",
    "CertaintySweep",
    "Distribution",
    "ideal_mixture",
    "obedience_error",
    "tvd",
    "PromptMode",
    "RecalibrationMap",
    "fit_recalibration",
    "AggregateCurves",
    "aggregate",
]
