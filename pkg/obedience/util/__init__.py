"""
Configuration loading, JSON encoding and hashing helpers.
"""

from .config import (
    ENV_PREFIX,
    cast_value,
    load_config_file,
    load_config_from_env,
    load_dotenv_file,
    merge_configs,
    normalize_config_key,
    validate_config,
)
from .encoding import (
    canonical_json,
    file_sha256,
    json_serializer,
    safe_json_decode,
    safe_json_encode,
    sha256_hex,
)

__all__ = [
    "ENV_PREFIX",
    "cast_value",
    "load_config_file",
    "load_config_from_env",
    "load_dotenv_file",
    "merge_configs",
    "normalize_config_key",
    "validate_config",
    "canonical_json",
    "file_sha256",
    "json_serializer",
    "safe_json_decode",
    "safe_json_encode",
    "sha256_hex",
]
