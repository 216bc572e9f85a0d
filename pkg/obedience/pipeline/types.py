"""
Run configuration and per-sample results.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

from ..core.config import BackendConfig
from ..errors import ContractError, ErrorSource, ObedienceError
from ..prob import CertaintySweep, Distribution, ObedienceRecord
from ..prompts import PromptMode
from ..recalibration import RecalibrationMap
from ..trace import Outcome


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run's prompts and scoring."""

    mode: PromptMode = field(default_factory=PromptMode)
    sweep: CertaintySweep = field(default_factory=CertaintySweep)
    recalibration: Optional[RecalibrationMap] = None
    category_recalibration: Mapping[str, RecalibrationMap] = field(default_factory=dict)
    backend: BackendConfig = field(default_factory=BackendConfig)
    cache_dir: Optional[Path] = None
    unfiltered: bool = False
    alternatives: Mapping[str, str] = field(default_factory=dict)
    template_dir: Optional[Path] = None
    concurrency: Optional[int] = None

    def validate(self) -> "RunConfig":
        has_map = self.recalibration is not None or bool(self.category_recalibration)
        if self.mode.recalibrated and not has_map:
            raise ContractError("recalibrated mode needs a recalibration map", source=ErrorSource.CONFIG)
        if has_map and not self.mode.recalibrated:
            raise ContractError("a recalibration map was given but the mode is not recalibrated",
                                source=ErrorSource.CONFIG)
        maps = ([self.recalibration] if self.recalibration is not None else []) + list(
            self.category_recalibration.values()
        )
        for recalibration in maps:
            if recalibration.sweep != self.sweep:
                raise ContractError("recalibration map grid differs from the sweep", source=ErrorSource.CONFIG)
        if self.concurrency is not None and self.concurrency < 1:
            raise ContractError("concurrency must be >= 1", source=ErrorSource.CONFIG)
        self.backend.validate()
        return self

    def recalibration_for(self, category: str) -> Optional[RecalibrationMap]:
        """Map used for a sample of ``category``; per-category maps take precedence."""
        if not self.mode.recalibrated:
            return None
        if category in self.category_recalibration:
            return self.category_recalibration[category]
        if self.recalibration is None:
            raise ContractError(f"no recalibration map for category {category!r}",
                                source=ErrorSource.PIPELINE)
        return self.recalibration

    def expressed_certainties(self, category: str = "") -> Tuple[float, ...]:
        recalibration = self.recalibration_for(category)
        if recalibration is None:
            return self.sweep.grid
        return tuple(float(recalibration.lookup(c)) for c in self.sweep)

    @property
    def workers(self) -> int:
        return self.concurrency or self.backend.max_inflight

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode.to_dict(),
            "sweep": list(self.sweep.grid),
            "recalibration": [list(p) for p in self.recalibration.pairs()] if self.recalibration else None,
            "category_recalibration": {
                k: [list(p) for p in v.pairs()] for k, v in sorted(self.category_recalibration.items())
            },
            "backend": {
                "endpoint": self.backend.endpoint,
                "model": self.backend.model,
                "top_k": self.backend.top_k,
                "max_inflight": self.backend.max_inflight,
                "timeout": self.backend.timeout,
                "retry_attempts": self.backend.retry.max_attempts,
                "retry_backoff": self.backend.retry.backoff_base,
                "api_key_env": self.backend.api_key_env,
            },
            "cache_dir": str(self.cache_dir) if self.cache_dir else None,
            "unfiltered": self.unfiltered,
            "alternatives": dict(sorted(self.alternatives.items())),
            "template_dir": str(self.template_dir) if self.template_dir else None,
        }


def _outcome_to_list(outcome: Outcome) -> list:
    return [outcome.kind, outcome.step, outcome.token]


def _outcome_from_list(data: Sequence[Any]) -> Outcome:
    return Outcome(str(data[0]), int(data[1]), str(data[2]))


@dataclass(frozen=True)
class SweepDistributions:
    """Aligned prefix distributions of one sample: prior, point mass and one per grid point."""

    prior: Distribution
    context_point: Distribution
    observed: Tuple[Distribution, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "observed", tuple(self.observed))
        for other in (self.context_point,) + self.observed:
            self.prior.require_same_support(other)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "outcomes": [_outcome_to_list(o) for o in self.prior.outcomes],
            "prior": list(self.prior.masses),
            "context_point": list(self.context_point.masses),
            "observed": [list(d.masses) for d in self.observed],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SweepDistributions":
        outcomes = tuple(_outcome_from_list(o) for o in data["outcomes"])

        def build(masses: Sequence[float]) -> Distribution:
            return Distribution(outcomes, tuple(float(m) for m in masses), normalize=False)

        return cls(build(data["prior"]), build(data["context_point"]),
                   tuple(build(m) for m in data["observed"]))


@dataclass(frozen=True)
class SampleResult:
    """
    Outcome of evaluating one sample over the sweep.

    ``record`` is None when the sample could not be scored; ``diagnostics``
    then says why. ``expressed`` holds the certainty actually rendered for
    each target grid point.
    """

    sample_id: str
    category: str = ""
    prior_answer: Optional[str] = None
    reminder_text: Optional[str] = None
    context_text: Optional[str] = None
    expressed: Tuple[float, ...] = ()
    record: Optional[ObedienceRecord] = None
    self_confidence: Optional[float] = None
    prior_answer_mass: Optional[float] = None
    distributions: Optional[SweepDistributions] = None
    diagnostics: Tuple[str, ...] = ()
    error: Optional[Dict[str, Any]] = None

    @property
    def ok(self) -> bool:
        return self.record is not None and self.error is None

    @property
    def flagged(self) -> bool:
        return not self.ok or bool(self.diagnostics)

    @property
    def epsilon_obey(self) -> Optional[float]:
        return self.record.epsilon_obey if self.record else None

    @classmethod
    def failed(cls, sample_id: str, category: str, error: ObedienceError) -> "SampleResult":
        return cls(sample_id=sample_id, category=category, diagnostics=(error.message,),
                   error=error.to_dict())

    def to_dict(self) -> Dict[str, Any]:
        record = None
        if self.record is not None:
            record = {
                "sweep": list(self.record.sweep.grid),
                "sim_ctx": list(self.record.sim_to_context),
                "sim_prior": list(self.record.sim_to_prior),
                "deviation": list(self.record.deviation),
                "epsilon_obey": self.record.epsilon_obey,
            }
        return {
            "id": self.sample_id,
            "category": self.category,
            "prior_answer": self.prior_answer,
            "reminder_text": self.reminder_text,
            "context_text": self.context_text,
            "expressed": list(self.expressed),
            "record": record,
            "self_confidence": self.self_confidence,
            "prior_answer_mass": self.prior_answer_mass,
            "distributions": self.distributions.to_dict() if self.distributions else None,
            "diagnostics": list(self.diagnostics),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SampleResult":
        record = None
        if data.get("record"):
            raw = data["record"]
            record = ObedienceRecord(
                sweep=CertaintySweep(tuple(raw["sweep"])),
                sim_to_context=tuple(raw["sim_ctx"]),
                sim_to_prior=tuple(raw["sim_prior"]),
                deviation=tuple(raw["deviation"]),
                epsilon_obey=float(raw["epsilon_obey"]),
            )
        distributions = data.get("distributions")
        return cls(
            sample_id=str(data["id"]),
            category=data.get("category", ""),
            prior_answer=data.get("prior_answer"),
            reminder_text=data.get("reminder_text"),
            context_text=data.get("context_text"),
            expressed=tuple(float(c) for c in data.get("expressed", ())),
            record=record,
            self_confidence=data.get("self_confidence"),
            prior_answer_mass=data.get("prior_answer_mass"),
            distributions=SweepDistributions.from_dict(distributions) if distributions else None,
            diagnostics=tuple(data.get("diagnostics", ())),
            error=data.get("error"),
        )
