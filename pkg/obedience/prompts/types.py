"""
Prompt-mode toggles and rendered prompt records.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Optional

from ..errors import ContractError, ErrorSource


class ReminderKind(Enum):
    NONE = "none"
    SELF_PRIOR = "self-prior"
    PROVIDED_ALTERNATIVE = "provided-alternative"


class ReminderStyle(Enum):
    ANSWER_ONLY = "answer-only"
    EXPLAINED = "explained"


class ContextForm(Enum):
    ORIGINAL = "original"
    SIMPLIFIED = "simplified"
    SUMMARIZED = "summarized"
    PROVIDED_SIMPLE = "provided-simple"

    @property
    def is_simple(self) -> bool:
        """Rendered through the "Context: The answer is ..." template."""
        return self in (ContextForm.SIMPLIFIED, ContextForm.PROVIDED_SIMPLE)


# command-line spellings
REMINDER_FLAGS = {
    "none": (ReminderKind.NONE, ReminderStyle.ANSWER_ONLY),
    "self": (ReminderKind.SELF_PRIOR, ReminderStyle.ANSWER_ONLY),
    "explained": (ReminderKind.SELF_PRIOR, ReminderStyle.EXPLAINED),
    "alt": (ReminderKind.PROVIDED_ALTERNATIVE, ReminderStyle.ANSWER_ONLY),
}
CONTEXT_FLAGS = {
    "original": ContextForm.ORIGINAL,
    "simplified": ContextForm.SIMPLIFIED,
    "summarized": ContextForm.SUMMARIZED,
    "provided": ContextForm.PROVIDED_SIMPLE,
}


@dataclass(frozen=True)
class PromptMode:
    """Which interaction-strategy enhancements a run applies."""

    reminder: ReminderKind = ReminderKind.NONE
    reminder_style: ReminderStyle = ReminderStyle.ANSWER_ONLY
    context_form: ContextForm = ContextForm.ORIGINAL
    recalibrated: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "reminder", ReminderKind(self.reminder))
        object.__setattr__(self, "reminder_style", ReminderStyle(self.reminder_style))
        object.__setattr__(self, "context_form", ContextForm(self.context_form))
        if self.reminder is ReminderKind.PROVIDED_ALTERNATIVE and self.reminder_style is ReminderStyle.EXPLAINED:
            raise ContractError(
                "a provided alternative has no explained form", source=ErrorSource.PROMPT
            )

    @classmethod
    def baseline(cls) -> "PromptMode":
        return cls()

    @classmethod
    def full(cls) -> "PromptMode":
        """Self-prior reminder, simplified context and recalibrated certainty."""
        return cls(ReminderKind.SELF_PRIOR, ReminderStyle.ANSWER_ONLY, ContextForm.SIMPLIFIED, True)

    @classmethod
    def from_flags(cls, reminder: str = "none", context: str = "original",
                   recalibrated: bool = False) -> "PromptMode":
        if reminder not in REMINDER_FLAGS:
            raise ContractError(f"unknown reminder {reminder!r}", source=ErrorSource.CONFIG)
        if context not in CONTEXT_FLAGS:
            raise ContractError(f"unknown context form {context!r}", source=ErrorSource.CONFIG)
        kind, style = REMINDER_FLAGS[reminder]
        return cls(kind, style, CONTEXT_FLAGS[context], recalibrated)

    @property
    def has_reminder(self) -> bool:
        return self.reminder is not ReminderKind.NONE

    @property
    def explains_prior(self) -> bool:
        return self.reminder is ReminderKind.SELF_PRIOR and self.reminder_style is ReminderStyle.EXPLAINED

    @property
    def label(self) -> str:
        """Ablation row label: reminder, recalibration and simplification marked ✓ or –."""
        marks = (self.has_reminder, self.recalibrated, self.context_form.is_simple)
        return " ".join("✓" if on else "–" for on in marks)

    def with_recalibration(self, recalibrated: bool = True) -> "PromptMode":
        return replace(self, recalibrated=recalibrated)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "reminder": self.reminder.value,
            "reminder_style": self.reminder_style.value,
            "context_form": self.context_form.value,
            "recalibrated": self.recalibrated,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PromptMode":
        return cls(
            ReminderKind(data.get("reminder", "none")),
            ReminderStyle(data.get("reminder_style", "answer-only")),
            ContextForm(data.get("context_form", "original")),
            bool(data.get("recalibrated", False)),
        )


@dataclass(frozen=True)
class RenderedPrompt:
    """
    A filled template and the values that went into it.

    The record, not the text, is authoritative for recovering the inputs.
    """

    text: str
    template: str
    question: str
    context: Optional[str] = None
    certainty_percent: Optional[int] = None
    reminder: Optional[str] = None

    def __str__(self) -> str:
        return self.text
