"""
Model backends: an HTTP completion client and a synthetic oracle.
"""

from ..core.config import BackendConfig
from ..errors import ContractError, ErrorSource
from .base import Backend, apply_stop
from .http import CompletionBackend, join_continuation
from .synthetic import SyntheticBackend, cap_tokens, synthetic_observed
from .types import BUILTIN_SPECS, DISTORTIONS, Generation, SyntheticModelSpec


def build_backend(config: BackendConfig) -> Backend:
    """Create the backend named by ``config.model``; ``synthetic:<name>`` selects a built-in oracle."""
    config.validate()
    if config.is_synthetic:
        name = config.model.split(":", 1)[1]
        if name not in BUILTIN_SPECS:
            raise ContractError(
                f"unknown synthetic model {name!r}; expected one of {sorted(BUILTIN_SPECS)}",
                source=ErrorSource.CONFIG,
            )
        return SyntheticBackend(BUILTIN_SPECS[name], top_k=config.top_k, name=config.model)
    return CompletionBackend(config)


__all__ = [
    "Backend",
    "BUILTIN_SPECS",
    "CompletionBackend",
    "DISTORTIONS",
    "Generation",
    "SyntheticBackend",
    "SyntheticModelSpec",
    "apply_stop",
    "build_backend",
    "cap_tokens",
    "join_continuation",
    "synthetic_observed",
]
