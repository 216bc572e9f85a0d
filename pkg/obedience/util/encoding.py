"""
JSON encoding and content hashing helpers.

``canonical_json`` is the single serialization used for cache keys and
on-disk records so identical values always produce identical bytes.
"""

import dataclasses
import hashlib
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Union


def json_serializer(obj: Any) -> Any:
    """Serializer for values the json module does not know."""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "isoformat"):
        return obj.isoformat()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return dataclasses.asdict(obj)
    if hasattr(obj, "_asdict"):
        return obj._asdict()
    if hasattr(obj, "tolist"):  # numpy arrays and scalars
        return obj.tolist()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def _finite(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value


def canonical_json(data: Any) -> str:
    """Compact JSON with sorted keys; non-finite floats become strings."""
    return json.dumps(
        _finite(data), sort_keys=True, separators=(",", ":"), ensure_ascii=False,
        default=json_serializer, allow_nan=False,
    )


def safe_json_encode(data: Any, pretty: bool = False) -> str:
    """Encode data to a JSON string; raises ValueError on unserializable input."""
    try:
        if pretty:
            return json.dumps(data, indent=2, separators=(",", ": "), sort_keys=True,
                              default=json_serializer, ensure_ascii=False)
        return json.dumps(data, default=json_serializer, separators=(",", ":"), ensure_ascii=False)
    except (TypeError, ValueError) as e:
        raise ValueError(f"Failed to encode JSON: {e}")


def safe_json_decode(json_str: str, default: Any = None) -> Any:
    """Decode a JSON string; returns ``default`` if decoding fails."""
    if not isinstance(json_str, str):
        return default
    try:
        return json.loads(json_str)
    except (json.JSONDecodeError, ValueError):
        return default


def sha256_hex(data: Union[str, bytes]) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def file_sha256(path: Union[str, Path], chunk_size: int = 1 << 16) -> str:
    """Streamed sha256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            digest.update(chunk)
    return digest.hexdigest()
