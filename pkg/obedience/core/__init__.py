"""
Core configuration and logging.
"""

from .config import (
    ANSWER_PARAMS,
    EXPLAINED_PARAMS,
    SUMMARY_PARAMS,
    BackendConfig,
    GenerationParams,
    RetryPolicy,
)
from .logging import configure_logging

__all__ = [
    "ANSWER_PARAMS",
    "EXPLAINED_PARAMS",
    "SUMMARY_PARAMS",
    "BackendConfig",
    "GenerationParams",
    "RetryPolicy",
    "configure_logging",
]
