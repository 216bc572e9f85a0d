"""
Prompt templates for prior elicitation, answer extraction, summarization and
certainty-annotated question answering.
"""

from .renderer import (
    SIMPLE_PREFIX,
    TEMPLATE_NAMES,
    PromptRenderer,
    default_renderer,
    main_template_name,
    render_extract,
    render_main,
    render_prior,
    render_summarize,
    simple_context,
    template_hashes,
)
from .types import (
    CONTEXT_FLAGS,
    REMINDER_FLAGS,
    ContextForm,
    PromptMode,
    ReminderKind,
    ReminderStyle,
    RenderedPrompt,
)

__all__ = [
    "CONTEXT_FLAGS",
    "REMINDER_FLAGS",
    "SIMPLE_PREFIX",
    "TEMPLATE_NAMES",
    "ContextForm",
    "PromptMode",
    "PromptRenderer",
    "ReminderKind",
    "ReminderStyle",
    "RenderedPrompt",
    "default_renderer",
    "main_template_name",
    "render_extract",
    "render_main",
    "render_prior",
    "render_summarize",
    "simple_context",
    "template_hashes",
]
