"""
Prompt template rendering.

Templates are packaged text resources filled with ``str.format`` named
fields. User text is substituted, never parsed, so braces inside questions
or contexts pass through literally.
"""

import hashlib
import string
from importlib import resources
from pathlib import Path
from typing import Dict, Optional, Union

from ..errors import ContractError, ErrorSource, RenderError
from ..prob import Certainty, CertaintyLike
from .types import ContextForm, PromptMode, ReminderKind, RenderedPrompt

TEMPLATE_NAMES = (
    "prior",
    "extract",
    "summarize",
    "main",
    "main_reminder",
    "main_simplified",
    "main_reminder_simplified",
)

SIMPLE_PREFIX = "The answer is "


def simple_context(answer: str) -> str:
    """The simplified context sentence for ``answer``."""
    return f"{SIMPLE_PREFIX}{answer.strip()}"


def main_template_name(mode: PromptMode) -> str:
    name = "main"
    if mode.has_reminder:
        name += "_reminder"
    if mode.context_form.is_simple:
        name += "_simplified"
    return name


class PromptRenderer:
    """
    Holds one template set; ``template_dir`` overrides packaged templates
    file by file.
    """

    def __init__(self, template_dir: Optional[Union[str, Path]] = None):
        self.template_dir = Path(template_dir) if template_dir else None
        self._templates: Dict[str, str] = {}
        for name in TEMPLATE_NAMES:
            self._templates[name] = self._load(name)

    def _load(self, name: str) -> str:
        filename = f"{name}.txt"
        if self.template_dir is not None:
            override = self.template_dir / filename
            if override.is_file():
                return override.read_text(encoding="utf-8")
        return resources.files(__package__).joinpath("templates", filename).read_text(encoding="utf-8")

    def template(self, name: str) -> str:
        try:
            return self._templates[name]
        except KeyError:
            raise RenderError(f"unknown template {name!r}")

    def template_hashes(self) -> Dict[str, str]:
        """sha256 of every template, keyed by name."""
        return {
            name: hashlib.sha256(text.encode("utf-8")).hexdigest()
            for name, text in sorted(self._templates.items())
        }

    def _fill(self, name: str, **fields: str) -> str:
        template = self.template(name)
        wanted = {field for _, field, _, _ in string.Formatter().parse(template) if field is not None}
        missing = wanted - fields.keys()
        if missing:
            raise RenderError(f"template {name!r} has unfilled placeholders: {sorted(missing)}")
        if any(not field.isidentifier() for field in wanted):
            raise RenderError(f"template {name!r} has a positional or malformed placeholder")
        return template.format(**{k: v for k, v in fields.items() if k in wanted})

    @staticmethod
    def _require(value: Optional[str], what: str) -> str:
        if value is None or not value.strip():
            raise RenderError(f"{what} must be non-empty")
        return value

    def render_prior(self, question: str) -> RenderedPrompt:
        question = self._require(question, "question")
        return RenderedPrompt(self._fill("prior", question=question), "prior", question)

    def render_extract(self, question: str, context_text: str) -> RenderedPrompt:
        question = self._require(question, "question")
        context_text = self._require(context_text, "context")
        text = self._fill("extract", question=question, context=context_text)
        return RenderedPrompt(text, "extract", question, context=context_text)

    def render_summarize(self, question: str, context_text: str) -> RenderedPrompt:
        question = self._require(question, "question")
        context_text = self._require(context_text, "context")
        text = self._fill("summarize", question=question, context=context_text)
        return RenderedPrompt(text, "summarize", question, context=context_text)

    def render_main(
        self,
        question: str,
        context_text: str,
        certainty: CertaintyLike,
        mode: PromptMode,
        reminder_text: Optional[str] = None,
    ) -> RenderedPrompt:
        """
        Render the certainty-annotated question-answering prompt.

        Simple context forms expect ``context_text`` to read
        ``"The answer is <answer>"``; the answer part fills the template.
        """
        question = self._require(question, "question")
        context_text = self._require(context_text, "context")
        certainty = Certainty.of(certainty)
        if not certainty.is_integer_percent():
            raise ContractError(
                f"certainty {certainty.value!r} is not an integer percent", source=ErrorSource.PROMPT
            )
        if mode.reminder is ReminderKind.NONE and reminder_text is not None:
            raise ContractError("reminder text given but mode has no reminder", source=ErrorSource.PROMPT)
        if mode.has_reminder and (reminder_text is None or not reminder_text.strip()):
            raise ContractError("mode requires reminder text", source=ErrorSource.PROMPT)

        fields = {"question": question, "certainty": str(certainty.percent)}
        if mode.has_reminder:
            fields["reminder"] = reminder_text
        if mode.context_form.is_simple:
            if not context_text.startswith(SIMPLE_PREFIX) or not context_text[len(SIMPLE_PREFIX):].strip():
                raise ContractError(
                    f"simple context must read {SIMPLE_PREFIX!r} followed by an answer",
                    source=ErrorSource.PROMPT,
                )
            fields["answer"] = context_text[len(SIMPLE_PREFIX):]
        else:
            fields["context"] = context_text

        name = main_template_name(mode)
        return RenderedPrompt(
            self._fill(name, **fields),
            name,
            question,
            context=context_text,
            certainty_percent=certainty.percent,
            reminder=reminder_text,
        )


_default_renderer: Optional[PromptRenderer] = None


def default_renderer() -> PromptRenderer:
    global _default_renderer
    if _default_renderer is None:
        _default_renderer = PromptRenderer()
    return _default_renderer


def render_prior(question: str) -> RenderedPrompt:
    return default_renderer().render_prior(question)


def render_extract(question: str, context_text: str) -> RenderedPrompt:
    return default_renderer().render_extract(question, context_text)


def render_summarize(question: str, context_text: str) -> RenderedPrompt:
    return default_renderer().render_summarize(question, context_text)


def render_main(question: str, context_text: str, certainty: CertaintyLike, mode: PromptMode,
                reminder_text: Optional[str] = None) -> RenderedPrompt:
    return default_renderer().render_main(question, context_text, certainty, mode, reminder_text)


def template_hashes() -> Dict[str, str]:
    return default_renderer().template_hashes()
