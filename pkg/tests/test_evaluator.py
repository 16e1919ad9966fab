from __future__ import annotations

import pytest

from passagelab.curriculum import items_for_concept
from passagelab.errors import MalformedVerdictError
from passagelab.evaluator import (
    CategoryVerdict,
    ask_judge,
    categorization_accuracy,
    group_average,
    parse_alignment,
    parse_category,
    parse_comprehensibility,
    render_alignment_prompt,
    render_categorization_prompt,
    render_comprehensibility_prompt,
)
from passagelab.gateway import BackendConfig, Gateway, mock_backend

PASSAGE = (
    "When a forest turns into a field, big changes happen for the plants that "
    "live there. Some plants cannot survive, but others find new ways to live."
)


class TestRenderAlignment:
    def test_contains_grade_and_scale_anchor(self, small_catalog):
        item = small_catalog.item_for_outcome("2-PS1-1")
        prompt = render_alignment_prompt(PASSAGE, item)
        assert "Grade Level: 2" in prompt.text
        assert "1 = does not align at all" in prompt.text
        assert "[Curriculum Information]" in prompt.text
        assert "[Input Passage Content]" in prompt.text
        assert PASSAGE in prompt.text

    def test_deterministic(self, sample_item):
        assert (
            render_alignment_prompt(PASSAGE, sample_item).text
            == render_alignment_prompt(PASSAGE, sample_item).text
        )

    def test_empty_passage_rejected(self, sample_item):
        with pytest.raises(ValueError):
            render_alignment_prompt("  ", sample_item)


class TestRenderCategorization:
    def test_all_candidate_blocks_in_label_order(self, small_catalog):
        candidates = items_for_concept(small_catalog, "LS1")
        prompt = render_categorization_prompt(PASSAGE, candidates)
        assert '"Type": "A"' in prompt.text
        assert '"Type": "B"' in prompt.text
        assert '"Type": "C"' in prompt.text
        assert prompt.text.index('"Type": "A"') < prompt.text.index('"Type": "C"')
        assert "[Curriculum Item Categories]" in prompt.text

    def test_two_candidates(self, small_catalog):
        candidates = items_for_concept(small_catalog, "LS1")[:2]
        prompt = render_categorization_prompt(PASSAGE, candidates)
        assert prompt.text.count('"Type"') == 2

    def test_single_candidate_rejected(self, small_catalog):
        candidates = items_for_concept(small_catalog, "PS1")
        with pytest.raises(ValueError):
            render_categorization_prompt(PASSAGE, candidates)


class TestRenderComprehensibility:
    def test_contains_grade_and_aspects(self):
        prompt = render_comprehensibility_prompt(PASSAGE, 3, "What happens to plants?")
        assert "Grade 3" in prompt.text
        for aspect in ("Readability:", "Correctness:", "Coherence:", "Engagement:"):
            assert aspect in prompt.text

    def test_deterministic(self):
        assert (
            render_comprehensibility_prompt(PASSAGE, 2).text
            == render_comprehensibility_prompt(PASSAGE, 2).text
        )

    def test_grade_out_of_range(self):
        with pytest.raises(ValueError):
            render_comprehensibility_prompt(PASSAGE, 9)


class TestParseAlignment:
    def test_published_format(self):
        assert parse_alignment("Alignment Score: 5") == 5

    def test_case_and_spacing_variants(self):
        assert parse_alignment("alignment score:  3 ") == 3

    def test_last_marker_wins(self):
        text = "The rubric says Alignment Score: 1 means bad.\nAlignment Score: 4"
        assert parse_alignment(text) == 4

    @pytest.mark.parametrize(
        "bad",
        ["Score: high", "", "Alignment Score: 0", "Alignment Score: 6", "Alignment Score: 4.5"],
    )
    def test_malformed(self, bad):
        with pytest.raises(MalformedVerdictError):
            parse_alignment(bad)

    def test_round_trip_all_scores(self):
        for k in range(1, 6):
            assert parse_alignment(f"Alignment Score: {k}") == k

    def test_raw_text_retained(self):
        with pytest.raises(MalformedVerdictError) as err:
            parse_alignment("no verdict here")
        assert err.value.raw == "no verdict here"


class TestParseCategory:
    LABELS = set("ABCDEFG")

    def test_published_format(self):
        assert parse_category("Predicted Type: A", self.LABELS) == "A"

    def test_marker_wins_over_prose(self):
        assert parse_category("The answer is Type B. Predicted Type: B", self.LABELS) == "B"

    def test_unknown_label_rejected(self):
        with pytest.raises(MalformedVerdictError):
            parse_category("Predicted Type: Z", self.LABELS)

    def test_lowercase_tolerated(self):
        assert parse_category("predicted type: c", self.LABELS) == "C"

    def test_missing_marker(self):
        with pytest.raises(MalformedVerdictError):
            parse_category("I think it is B", self.LABELS)


class TestParseComprehensibility:
    def test_published_format(self):
        text = "Readability: 5, Correctness: 5, Coherence: 5, Engagement: 5"
        assert parse_comprehensibility(text) == (5, 5, 5, 5)

    def test_order_independent(self):
        text = "Engagement: 4, Readability: 3, Coherence: 5, Correctness: 5"
        assert parse_comprehensibility(text) == (3, 5, 5, 4)

    def test_one_aspect_alone_fails(self):
        with pytest.raises(MalformedVerdictError):
            parse_comprehensibility("Readability: 5")

    def test_out_of_range_fails(self):
        with pytest.raises(MalformedVerdictError):
            parse_comprehensibility(
                "Readability: 5, Correctness: 9, Coherence: 5, Engagement: 5"
            )

    def test_multiline_tolerated(self):
        text = "Readability: 4\nCorrectness: 5\nCoherence: 4\nEngagement: 3\n"
        assert parse_comprehensibility(text) == (4, 5, 4, 3)


def verdicts(pairs):
    return [
        CategoryVerdict(predicted_label=p, passage_id=f"p{i}", concept_id="C", gold_label=g)
        for i, (p, g) in enumerate(pairs)
    ]


class TestAccuracy:
    def test_all_correct(self):
        result = categorization_accuracy(verdicts([("A", "A")] * 5))
        assert result.value == 1.0

    def test_none_correct(self):
        result = categorization_accuracy(verdicts([("A", "B")] * 5))
        assert result.value == 0.0

    def test_paper_scale_division(self):
        pairs = [("A", "A")] * 157 + [("A", "B")] * 80
        result = categorization_accuracy(verdicts(pairs))
        assert result.total == 237
        assert result.correct == 157
        assert result.value == 157 / 237

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            categorization_accuracy([])

    def test_bounds(self):
        result = categorization_accuracy(verdicts([("A", "A"), ("B", "A")]))
        assert 0.0 <= result.value <= 1.0

    def test_matches_brute_force_recount_on_shuffled_labels(self):
        import random

        rng = random.Random(5)
        labels = list("ABCDEFG")
        for _ in range(200):
            pairs = [(rng.choice(labels), rng.choice(labels)) for _ in range(rng.randint(1, 40))]
            result = categorization_accuracy(verdicts(pairs))
            recount = sum(1 for predicted, gold in pairs if predicted == gold)
            assert result.correct == recount
            assert result.value == recount / len(pairs)


class TestGroupAverage:
    def test_single_group(self):
        assert group_average([4, 5, 3], 3) == [4.0]

    def test_two_groups(self):
        assert group_average([5, 5, 5, 1, 1, 1], 3) == [5.0, 1.0]

    def test_non_divisible_rejected(self):
        with pytest.raises(ValueError):
            group_average([4, 5], 3)


def judge_gateway(rules):
    config = BackendConfig(backend_id="judge-lm")
    return Gateway(config, mock_backend(rules), sleep=lambda _: None)


class TestAskJudge:
    def test_reask_until_valid(self, sample_item):
        responses = iter(["gibberish", "still nothing", "Alignment Score: 4"])
        gw = judge_gateway([("", lambda req: next(responses))])
        prompt = render_alignment_prompt(PASSAGE, sample_item)
        verdict, transcript = ask_judge(gw, prompt, parse_alignment, reasks=2)
        assert verdict == 4
        assert transcript.response_text == "Alignment Score: 4"

    def test_gives_up_after_budget(self, sample_item):
        gw = judge_gateway({"": "never a verdict"})
        prompt = render_alignment_prompt(PASSAGE, sample_item)
        with pytest.raises(MalformedVerdictError):
            ask_judge(gw, prompt, parse_alignment, reasks=2)

    def test_prompt_passes_through_unmodified(self, sample_item):
        transport = mock_backend({"": "Alignment Score: 5"})
        gw = Gateway(BackendConfig(backend_id="judge-lm"), transport, sleep=lambda _: None)
        prompt = render_alignment_prompt(PASSAGE, sample_item)
        ask_judge(gw, prompt, parse_alignment)
        assert transport.calls[0].user_text == prompt.text

    def test_reask_recovery_survives_record_then_replay(self, sample_item, tmp_path):
        from passagelab.gateway import CassetteRecorder, replay_cassette

        cassette = tmp_path / "judge.jsonl"
        responses = iter(["not a verdict", "Alignment Score: 3"])
        recording = Gateway(
            BackendConfig(backend_id="judge-lm"),
            mock_backend([("", lambda req: next(responses))]),
            recorder=CassetteRecorder(cassette),
            sleep=lambda _: None,
        )
        prompt = render_alignment_prompt(PASSAGE, sample_item)
        recorded, _ = ask_judge(recording, prompt, parse_alignment, reasks=2)
        assert recorded == 3

        replaying = Gateway(
            BackendConfig(backend_id="judge-lm"),
            replay_cassette(cassette),
            sleep=lambda _: None,
        )
        replayed, _ = ask_judge(replaying, prompt, parse_alignment, reasks=2)
        assert replayed == 3
