"""
Configuration utilities for the obedience harness.
Provides configuration loading from the environment, ``.env`` files and
``key = value`` configuration files.
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dotenv import load_dotenv

from ..errors import ContractError, ErrorSource

ENV_PREFIX = "OBEDIENCE_"


def load_dotenv_file(path: Optional[Union[str, Path]] = None) -> bool:
    """Load a ``.env`` file into the process environment without overriding set variables."""
    return load_dotenv(dotenv_path=path, override=False)


def load_config_from_env(prefix: str = ENV_PREFIX) -> Dict[str, str]:
    """
    Load configuration from environment variables with given prefix.
    """
    config = {}
    for key, value in os.environ.items():
        if key.startswith(prefix):
            config[normalize_config_key(key[len(prefix):])] = value
    return config


def cast_value(value: Any, cast_type: type, default: Any = None) -> Any:
    """Cast a raw configuration string to ``cast_type``; falls back to ``default``."""
    try:
        if cast_type == bool:
            if isinstance(value, str):
                return value.strip().lower() in ("true", "1", "yes", "on")
            return bool(value)
        if cast_type == list:
            if isinstance(value, str):
                return [item.strip() for item in value.split(",") if item.strip()]
            return list(value) if value else []
        return cast_type(value)
    except (ValueError, TypeError):
        return default


def normalize_config_key(key: str) -> str:
    """Normalize configuration key to standard format."""
    return key.strip().lower().replace("-", "_")


def merge_configs(*configs: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    """
    Merge multiple configuration dictionaries.
    Later configs override earlier ones; ``None`` values never override.
    """
    result: Dict[str, Any] = {}
    for config in configs:
        if isinstance(config, dict):
            result.update({k: v for k, v in config.items() if v is not None})
    return result


def load_config_file(file_path: Union[str, Path]) -> Dict[str, Any]:
    """
    Load configuration from a file.

    ``.json`` files are parsed as JSON objects; anything else is read as
    ``key = value`` lines where ``#`` starts a comment.
    """
    path = Path(file_path)
    if not path.exists():
        raise ContractError(f"Configuration file not found: {path}", source=ErrorSource.CONFIG)

    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ContractError(f"{path}: expected a JSON object", source=ErrorSource.CONFIG)
        return {normalize_config_key(k): v for k, v in data.items()}

    config: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ContractError(f"{path}:{lineno}: expected key = value", source=ErrorSource.CONFIG)
        key, value = line.split("=", 1)
        config[normalize_config_key(key)] = value.strip()
    return config


def validate_config(config: Dict[str, Any],
                    schema: Dict[str, Dict[str, Any]]) -> List[str]:
    """
    Validate configuration against a schema.
    Returns list of validation errors.

    Schema format:
    {
        'field_name': {
            'type': type,
            'choices': [list_of_valid_values],
            'min': min_value,
        }
    }
    """
    errors = []
    for name, rules in schema.items():
        if name not in config:
            if rules.get("required", False):
                errors.append(f"Missing required field: {name}")
            continue
        value = config[name]
        expected_type = rules.get("type")
        if expected_type and not isinstance(value, expected_type):
            errors.append(f"Field {name} must be of type {expected_type.__name__}")
            continue
        choices = rules.get("choices")
        if choices and value not in choices:
            errors.append(f"Field {name} must be one of: {choices}")
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            min_val = rules.get("min")
            if min_val is not None and value < min_val:
                errors.append(f"Field {name} must be >= {min_val}")
    return errors
