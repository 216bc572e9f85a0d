"""
Tests for prompt templates and rendering.
"""

import pytest

from obedience.errors import ContractError, RenderError
from obedience.prompts import (
    TEMPLATE_NAMES,
    ContextForm,
    PromptMode,
    PromptRenderer,
    ReminderKind,
    ReminderStyle,
    simple_context,
)

QUESTION = "What is the capital of France?"
CONTEXT = "Paris is the capital of France.\nIt lies on the Seine."

REMINDER = PromptMode(ReminderKind.SELF_PRIOR)
SIMPLIFIED = PromptMode(context_form=ContextForm.SIMPLIFIED)
REMINDER_SIMPLIFIED = PromptMode(ReminderKind.SELF_PRIOR, context_form=ContextForm.SIMPLIFIED)


@pytest.fixture
def renderer():
    return PromptRenderer()


def expected(fixtures_dir, name):
    return (fixtures_dir / "prompts" / f"{name}.txt").read_text(encoding="utf-8")


class TestTemplates:
    """Rendered prompts match the reference files byte for byte"""

    def test_prior(self, renderer, fixtures_dir):
        assert renderer.render_prior(QUESTION).text == expected(fixtures_dir, "prior")

    def test_extract(self, renderer, fixtures_dir):
        assert renderer.render_extract(QUESTION, CONTEXT).text == expected(fixtures_dir, "extract")

    def test_summarize(self, renderer, fixtures_dir):
        assert renderer.render_summarize(QUESTION, CONTEXT).text == expected(fixtures_dir, "summarize")

    @pytest.mark.parametrize(
        "name,mode,context,reminder",
        [
            ("main", PromptMode(), CONTEXT, None),
            ("main_reminder", REMINDER, CONTEXT, "Lyon"),
            ("main_simplified", SIMPLIFIED, simple_context("Paris"), None),
            ("main_reminder_simplified", REMINDER_SIMPLIFIED, simple_context("Paris"), "Lyon"),
        ],
    )
    def test_main_variants(self, renderer, fixtures_dir, name, mode, context, reminder):
        rendered = renderer.render_main(QUESTION, context, 0.4, mode, reminder)
        assert rendered.template == name
        assert rendered.text == expected(fixtures_dir, name)
        assert rendered.certainty_percent == 40

    def test_certainty_appears_twice(self, renderer):
        text = renderer.render_main(QUESTION, CONTEXT, 0.6, PromptMode()).text
        assert text.count("60%") == 2

    def test_braces_pass_through(self, renderer):
        text = renderer.render_main("What does {x} mean?", "It means {0} and {y}.", 0.2, PromptMode()).text
        assert "What does {x} mean?" in text
        assert "It means {0} and {y}." in text

    def test_template_hashes_cover_every_template(self, renderer):
        hashes = renderer.template_hashes()
        assert sorted(hashes) == sorted(TEMPLATE_NAMES)
        assert all(len(digest) == 64 for digest in hashes.values())


class TestRenderContracts:
    """Invalid inputs"""

    @pytest.mark.parametrize("question", ["", "   ", None])
    def test_empty_question(self, renderer, question):
        with pytest.raises(RenderError):
            renderer.render_prior(question)

    def test_empty_context(self, renderer):
        with pytest.raises(RenderError):
            renderer.render_main(QUESTION, "", 0.4, PromptMode())

    def test_reminder_without_reminder_mode(self, renderer):
        with pytest.raises(ContractError):
            renderer.render_main(QUESTION, CONTEXT, 0.4, PromptMode(), "Lyon")

    def test_reminder_mode_without_text(self, renderer):
        with pytest.raises(ContractError):
            renderer.render_main(QUESTION, CONTEXT, 0.4, REMINDER)

    def test_non_integer_percent(self, renderer):
        with pytest.raises(ContractError):
            renderer.render_main(QUESTION, CONTEXT, 0.405, PromptMode())

    def test_simple_form_needs_simple_context(self, renderer):
        with pytest.raises(ContractError):
            renderer.render_main(QUESTION, CONTEXT, 0.4, SIMPLIFIED)


class TestTemplateOverrides:
    """Template directories override packaged templates file by file"""

    def test_override_one_template(self, tmp_path):
        (tmp_path / "prior.txt").write_text("Q: {question}\nA:", encoding="utf-8")
        renderer = PromptRenderer(tmp_path)
        assert renderer.render_prior("Why?").text == "Q: Why?\nA:"
        assert renderer.render_extract("Why?", "Because.").text.endswith("Answer retrieved from the context:")

    def test_positional_placeholder_rejected(self, tmp_path):
        (tmp_path / "prior.txt").write_text("Q: {question} {0}", encoding="utf-8")
        with pytest.raises(RenderError):
            PromptRenderer(tmp_path).render_prior("Why?")

    def test_unknown_placeholder_rejected(self, tmp_path):
        (tmp_path / "prior.txt").write_text("Q: {question} {language}", encoding="utf-8")
        with pytest.raises(RenderError):
            PromptRenderer(tmp_path).render_prior("Why?")

    def test_override_changes_hash(self, tmp_path):
        (tmp_path / "summarize.txt").write_text("{question}\n{context}\nSummary:", encoding="utf-8")
        overridden = PromptRenderer(tmp_path).template_hashes()["summarize"]
        assert overridden != PromptRenderer().template_hashes()["summarize"]


class TestPromptMode:
    """Mode toggles and labels"""

    def test_labels(self):
        assert PromptMode.baseline().label == "– – –"
        assert PromptMode.full().label == "✓ ✓ ✓"
        assert PromptMode(ReminderKind.SELF_PRIOR).with_recalibration().label == "✓ ✓ –"
        assert SIMPLIFIED.label == "– – ✓"

    def test_from_flags(self):
        mode = PromptMode.from_flags("explained", "summarized")
        assert mode.reminder is ReminderKind.SELF_PRIOR
        assert mode.reminder_style is ReminderStyle.EXPLAINED
        assert mode.context_form is ContextForm.SUMMARIZED
        assert not mode.context_form.is_simple

    def test_provided_context_is_simple(self):
        assert PromptMode.from_flags("alt", "provided").context_form.is_simple

    def test_unknown_flag(self):
        with pytest.raises(ContractError):
            PromptMode.from_flags("loud")

    def test_provided_alternative_has_no_explained_form(self):
        with pytest.raises(ContractError):
            PromptMode(ReminderKind.PROVIDED_ALTERNATIVE, ReminderStyle.EXPLAINED)

    def test_dict_form(self):
        mode = PromptMode.full()
        assert mode.to_dict() == {
            "reminder": "self-prior",
            "reminder_style": "answer-only",
            "context_form": "simplified",
            "recalibrated": True,
        }
        assert PromptMode.from_dict(mode.to_dict()) == mode
