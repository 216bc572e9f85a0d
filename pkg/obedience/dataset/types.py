"""
Dataset records and filter reports.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from ..errors import ReportError
from .normalize import normalize_answer

REQUIRED_FIELDS = ("id", "question", "context", "context_answer")
OPTIONAL_FIELDS = ("gold_answer", "category")


@dataclass(frozen=True)
class Sample:
    """One retrieval-augmented question with the answer its context conveys."""

    id: str
    question: str
    context: str
    context_answer: str
    gold_answer: Optional[str] = None
    category: str = ""

    @property
    def context_is_correct(self) -> Optional[bool]:
        """Whether the context answer matches the gold answer; None without a gold answer."""
        if self.gold_answer is None:
            return None
        return normalize_answer(self.context_answer) == normalize_answer(self.gold_answer)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "id": self.id,
            "question": self.question,
            "context": self.context,
            "context_answer": self.context_answer,
        }
        if self.gold_answer is not None:
            data["gold_answer"] = self.gold_answer
        data["category"] = self.category
        return data


@dataclass(frozen=True)
class FilterReport:
    """Per-backend retrieval success rates and the samples every backend retrieved."""

    rates: Dict[str, float]
    survivors: Tuple[str, ...]
    total: int = 0
    failures: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rates": dict(self.rates),
            "survivors": list(self.survivors),
            "total": self.total,
            "failures": {k: list(v) for k, v in self.failures.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FilterReport":
        return cls(
            rates={k: float(v) for k, v in data["rates"].items()},
            survivors=tuple(data["survivors"]),
            total=int(data.get("total", 0)),
            failures={k: tuple(v) for k, v in data.get("failures", {}).items()},
        )

    def save(self, path: Union[str, Path]) -> None:
        try:
            Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
                                  encoding="utf-8")
        except OSError as e:
            raise ReportError(f"cannot write filter report: {e}", path=str(path), cause=e)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "FilterReport":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, ValueError, KeyError) as e:
            raise ReportError(f"cannot read filter report: {e}", path=str(path), cause=e)
