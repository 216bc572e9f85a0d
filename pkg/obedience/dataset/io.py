"""
Line-delimited JSON dataset files.

Each line is one object with the fields ``id``, ``question``, ``context``,
``context_answer`` and optionally ``gold_answer`` and ``category``. Blank
lines are ignored.
"""

import json
from pathlib import Path
from typing import Iterable, List, Set, Union

import structlog

from ..errors import DatasetError, ErrorCode
from ..util import file_sha256
from .types import OPTIONAL_FIELDS, REQUIRED_FIELDS, Sample

logger = structlog.get_logger(__name__)


def parse_record(raw: str, line: int) -> Sample:
    """Parse and validate one dataset line."""
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise DatasetError(f"invalid JSON: {e.msg}", line=line, cause=e)
    if not isinstance(data, dict):
        raise DatasetError("record must be a JSON object", line=line)
    for name in REQUIRED_FIELDS:
        value = data.get(name)
        if value is None:
            raise DatasetError(f"missing required field {name!r}", line=line,
                               code=ErrorCode.MISSING_PARAMETER)
        if not isinstance(value, (str, int)) or not str(value).strip():
            raise DatasetError(f"field {name!r} must be a non-empty string", line=line)
    for name in OPTIONAL_FIELDS:
        if data.get(name) is not None and not isinstance(data[name], str):
            raise DatasetError(f"field {name!r} must be a string", line=line)
    gold = data.get("gold_answer")
    category = data.get("category") or ""
    return Sample(
        id=str(data["id"]),
        question=str(data["question"]),
        context=str(data["context"]),
        context_answer=str(data["context_answer"]),
        gold_answer=gold,
        category=category,
    )


def load(path: Union[str, Path]) -> List[Sample]:
    """Load and validate every record of a dataset file."""
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset file not found: {path}", code=ErrorCode.MISSING_PARAMETER)
    samples: List[Sample] = []
    seen: Set[str] = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            if not raw.strip():
                continue
            sample = parse_record(raw, lineno)
            if sample.id in seen:
                raise DatasetError(f"duplicate id {sample.id!r}", line=lineno, code=ErrorCode.DUPLICATE_ID)
            seen.add(sample.id)
            samples.append(sample)
    logger.info("dataset.loaded", path=str(path), samples=len(samples))
    return samples


def dump(samples: Iterable[Sample], path: Union[str, Path]) -> None:
    """Write samples one JSON object per line."""
    with open(path, "w", encoding="utf-8") as f:
        for sample in samples:
            f.write(json.dumps(sample.to_dict(), ensure_ascii=False) + "\n")


def dataset_hash(path: Union[str, Path]) -> str:
    """sha256 of the dataset file bytes, recorded in run manifests."""
    return file_sha256(path)
