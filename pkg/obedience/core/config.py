"""
Configuration module for the obedience harness.

Backend connection settings, generation parameters and the retry policy.
Values come from (lowest to highest precedence) built-in defaults, the
environment (``OBEDIENCE_*``), a configuration file and command-line flags.
"""

import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Mapping, Optional, Tuple

from ..errors import ContractError, ErrorSource
from ..util.config import cast_value, load_config_from_env, validate_config

DEFAULT_ENDPOINT = "http://localhost:8000/v1"
DEFAULT_API_KEY_ENV = "OBEDIENCE_API_KEY"


@dataclass(frozen=True)
class RetryPolicy:
    """Retry policy for idempotent backend requests."""
    max_attempts: int = 3
    backoff_base: float = 0.5
    backoff_max: float = 8.0
    jitter: bool = True


@dataclass(frozen=True)
class BackendConfig:
    """Connection settings for a completion backend."""
    endpoint: str = DEFAULT_ENDPOINT
    model: str = "synthetic:square"
    top_k: int = 5
    max_inflight: int = 8
    timeout: float = 30.0
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    api_key_env: str = DEFAULT_API_KEY_ENV

    _SCHEMA = {
        "top_k": {"type": int, "min": 0},
        "max_inflight": {"type": int, "min": 1},
        "timeout": {"type": float},
    }

    @property
    def is_synthetic(self) -> bool:
        return self.model.startswith("synthetic:")

    @property
    def api_key(self) -> Optional[str]:
        return os.environ.get(self.api_key_env) or None

    @property
    def identity(self) -> str:
        """Stable backend identity used in cache keys and manifests."""
        if self.is_synthetic:
            return self.model
        return f"{self.endpoint.rstrip('/')}#{self.model}"

    def validate(self) -> "BackendConfig":
        """Validate the configuration; returns ``self`` for chaining."""
        errors = validate_config(
            {"top_k": self.top_k, "max_inflight": self.max_inflight, "timeout": float(self.timeout)},
            self._SCHEMA,
        )
        if self.timeout <= 0:
            errors.append("Field timeout must be > 0")
        if self.retry.max_attempts < 1:
            errors.append("Field retry.max_attempts must be >= 1")
        if not self.model:
            errors.append("model is required")
        if not self.is_synthetic and not self.endpoint:
            errors.append("endpoint is required")
        if errors:
            raise ContractError("; ".join(errors), source=ErrorSource.CONFIG)
        return self

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "BackendConfig":
        """Build a configuration from flat string settings (env, config file or flags)."""
        base = cls()
        retry = RetryPolicy(
            max_attempts=cast_value(values.get("retry_attempts", base.retry.max_attempts), int,
                                    base.retry.max_attempts),
            backoff_base=cast_value(values.get("retry_backoff", base.retry.backoff_base), float,
                                    base.retry.backoff_base),
        )
        return cls(
            endpoint=str(values.get("endpoint", base.endpoint)),
            model=str(values.get("model", base.model)),
            top_k=cast_value(values.get("top_k", base.top_k), int, base.top_k),
            max_inflight=cast_value(values.get("max_inflight", base.max_inflight), int,
                                    base.max_inflight),
            timeout=cast_value(values.get("timeout", base.timeout), float, base.timeout),
            retry=retry,
            api_key_env=str(values.get("api_key_env", base.api_key_env)),
        )

    @classmethod
    def from_env(cls) -> "BackendConfig":
        """Create configuration from ``OBEDIENCE_*`` environment variables."""
        return cls.from_mapping(load_config_from_env())

    def with_model(self, model: str) -> "BackendConfig":
        return replace(self, model=model)


@dataclass(frozen=True)
class GenerationParams:
    """Greedy generation parameters."""
    max_new_tokens: int = 32
    decoding: str = "greedy"
    stop: Tuple[str, ...] = ("\n",)

    def __post_init__(self) -> None:
        if self.max_new_tokens < 1:
            raise ContractError("max_new_tokens must be >= 1", source=ErrorSource.CONFIG)
        if self.decoding != "greedy":
            raise ContractError("only greedy decoding is supported", source=ErrorSource.CONFIG)
        object.__setattr__(self, "stop", tuple(self.stop))

    def to_dict(self) -> Dict[str, Any]:
        return {"max_new_tokens": self.max_new_tokens, "decoding": self.decoding, "stop": list(self.stop)}


ANSWER_PARAMS = GenerationParams(max_new_tokens=32, stop=("\n",))
EXPLAINED_PARAMS = GenerationParams(max_new_tokens=100, stop=("\n\n",))
SUMMARY_PARAMS = GenerationParams(max_new_tokens=160, stop=("\n\n",))
