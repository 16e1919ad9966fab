from __future__ import annotations

import pytest

from passagelab.errors import GradeRangeError, MalformedResponseError, TemplateError
from passagelab.promptkit import (
    GenerationSpec,
    Mode,
    PromptKind,
    TemplateSet,
    parse_topics,
    render_base_prompt,
    render_cogent_prompt,
    render_wonder_topics_prompt,
    word_target,
)

TABLE_OUTPUT = """1. How do animals use their legs to move?
2. What do plants use their leaves for?
3. How does a bird use its beak to eat food?
4. Why do turtles have hard shells?
5. How do flowers help plants grow?"""


class TestWordTarget:
    @pytest.mark.parametrize(("grade", "expected"), [(1, 100), (2, 200), (3, 300), (4, 400), (5, 500)])
    def test_linear(self, grade, expected):
        assert word_target(grade) == expected

    @pytest.mark.parametrize("grade", [0, 6, -1])
    def test_out_of_range(self, grade):
        with pytest.raises(GradeRangeError):
            word_target(grade)


class TestWonderPrompt:
    def test_contains_section_markers(self, sample_item):
        prompt = render_wonder_topics_prompt(sample_item, 5)
        assert "=== Science Concept ===" in prompt.text
        assert "=== Core Ideas ===" in prompt.text
        assert "=== Learning Outcomes ===" in prompt.text
        assert "generate 5 different topics" in prompt.text
        assert prompt.kind is PromptKind.WONDER_TOPICS

    def test_n_topics_parameterized(self, sample_item):
        prompt = render_wonder_topics_prompt(sample_item, 1)
        assert "generate 1 different topics" in prompt.text

    def test_grade_interpolated(self, sample_item):
        prompt = render_wonder_topics_prompt(sample_item, 5)
        assert "elementary school grade 1" in prompt.text

    def test_deterministic(self, sample_item):
        assert (
            render_wonder_topics_prompt(sample_item, 5).text
            == render_wonder_topics_prompt(sample_item, 5).text
        )

    def test_zero_topics_rejected(self, sample_item):
        with pytest.raises(ValueError):
            render_wonder_topics_prompt(sample_item, 0)

    def test_no_unresolved_placeholders(self, sample_item):
        assert "{{" not in render_wonder_topics_prompt(sample_item, 5).text


class TestPassagePrompts:
    def test_base_prompt_content(self, sample_item):
        spec = GenerationSpec.for_item(sample_item, Mode.BASE, "Why do turtles have hard shells?")
        prompt = render_base_prompt(spec)
        assert "Generate a 100-word reading passage around the Wonder Topic" in prompt.text
        assert "Mix science and everyday language." in prompt.text
        assert "Why do turtles have hard shells?" in prompt.text

    def test_base_never_contains_curriculum_sections(self, small_catalog):
        from passagelab.curriculum import enumerate_items

        for item in enumerate_items(small_catalog):
            spec = GenerationSpec.for_item(item, Mode.BASE, "What makes rain fall?")
            text = render_base_prompt(spec).text
            for marker in ("Science Concept", "Core Ideas", "Learning Outcomes"):
                assert marker not in text

    def test_cogent_contains_all_sections(self, sample_item):
        spec = GenerationSpec.for_item(sample_item, Mode.COGENT, "Why do turtles have hard shells?")
        text = render_cogent_prompt(spec).text
        for marker in (
            "=== Wonder Topic ===",
            "=== Science Concept ===",
            "=== Core Ideas ===",
            "=== Learning Outcomes ===",
        ):
            assert marker in text
        assert "should meet the Flesch Kincaid Grade Level" in text

    def test_word_target_interpolated_by_grade(self, small_catalog):
        item = small_catalog.item_for_outcome("2-PS1-1")
        spec = GenerationSpec.for_item(item, Mode.COGENT, "Why is a sponge soft?")
        assert "Generate a 200-word reading passage" in render_cogent_prompt(spec).text

    def test_mode_mismatch_errors(self, sample_item):
        base = GenerationSpec.for_item(sample_item, Mode.BASE, "Topic?")
        cogent = GenerationSpec.for_item(sample_item, Mode.COGENT, "Topic?")
        with pytest.raises(ValueError):
            render_base_prompt(cogent)
        with pytest.raises(ValueError):
            render_cogent_prompt(base)

    def test_human_mode_rejected_in_spec(self, sample_item):
        with pytest.raises(ValueError):
            GenerationSpec.for_item(sample_item, Mode.HUMAN, "Topic?")

    def test_empty_topic_rejected(self, sample_item):
        with pytest.raises(ValueError):
            GenerationSpec.for_item(sample_item, Mode.BASE, "")

    def test_deterministic(self, sample_item):
        spec = GenerationSpec.for_item(sample_item, Mode.COGENT, "Why do turtles have hard shells?")
        assert render_cogent_prompt(spec).text == render_cogent_prompt(spec).text


class TestParseTopics:
    def test_parses_published_example_output(self):
        topics = parse_topics(TABLE_OUTPUT, 5)
        assert len(topics) == 5
        assert topics[0] == "How do animals use their legs to move?"
        assert all(t.endswith("?") for t in topics)

    def test_small_list(self):
        assert parse_topics("1. A?\n2. B?", 2) == ["A?", "B?"]

    def test_empty_response_errors_with_raw(self):
        with pytest.raises(MalformedResponseError) as err:
            parse_topics("", 3)
        assert err.value.raw == ""

    def test_prose_between_items_tolerated(self):
        text = "Here are some ideas:\n1. Why is the sky blue?\nI hope these help.\n2. What is wind?"
        assert parse_topics(text, 2) == ["Why is the sky blue?", "What is wind?"]

    def test_too_few_items_errors(self):
        with pytest.raises(MalformedResponseError):
            parse_topics("1. Only one?", 2)

    def test_parenthesis_numbering(self):
        assert parse_topics("1) First?\n2) Second?", 2) == ["First?", "Second?"]


class TestTemplateSet:
    def test_missing_directory_file(self, tmp_path):
        templates = TemplateSet(tmp_path)
        with pytest.raises(TemplateError, match="not found"):
            templates.raw(PromptKind.BASE)

    def test_unresolved_placeholder_named(self, tmp_path):
        (tmp_path / "base.txt").write_text("Hello {{missing_thing}}", encoding="utf-8")
        templates = TemplateSet(tmp_path)
        with pytest.raises(TemplateError, match="missing_thing"):
            templates.render(PromptKind.BASE, {})

    def test_custom_directory_overrides(self, tmp_path, sample_item):
        (tmp_path / "base.txt").write_text(
            "Custom {{word_target}} about {{topic}} grade {{grade}}", encoding="utf-8"
        )
        templates = TemplateSet(tmp_path)
        spec = GenerationSpec.for_item(sample_item, Mode.BASE, "Why?")
        assert render_base_prompt(spec, templates).text == "Custom 100 about Why? grade 1"

    def test_digests_cover_all_kinds(self):
        digests = TemplateSet().digests()
        assert set(digests) == {k.value for k in PromptKind}
        assert all(len(d) == 64 for d in digests.values())

    def test_values_containing_braces_are_not_rescanned(self, tmp_path):
        (tmp_path / "base.txt").write_text("X {{topic}} Y", encoding="utf-8")
        templates = TemplateSet(tmp_path)
        rendered = templates.render(PromptKind.BASE, {"topic": "literal {{grade}} text"})
        assert rendered.text == "X literal {{grade}} text Y"
