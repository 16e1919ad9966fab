"""LLM-as-judge harness: render judge prompts, parse verdicts, score.

Verdict parsing is marker-based, case-insensitive, and last-marker-wins,
because judge models often restate the rubric before answering.  Every
parser either returns a valid verdict or raises MalformedVerdictError with
the raw text attached; nothing is silently defaulted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .curriculum import GRADE_RANGE, CurriculumItem
from .errors import MalformedVerdictError
from .gateway import Gateway, Transcript
from .promptkit import DEFAULT_TEMPLATES, PromptKind, RenderedPrompt, TemplateSet

SCORE_RANGE = range(1, 6)

# Additional identical re-asks after a malformed verdict before giving up.
DEFAULT_REASKS = 2

_INT_TOKEN = r"([+-]?\d+(?:\.\d+)?)"
_ALIGNMENT_RE = re.compile(r"alignment\s+score\s*[:=]\s*" + _INT_TOKEN, re.IGNORECASE)
_CATEGORY_RE = re.compile(r"predicted\s+type\s*[:=]\s*\"?([A-Za-z]+)\"?", re.IGNORECASE)
_ASPECTS = ("readability", "correctness", "coherence", "engagement")
_ASPECT_RES = {
    aspect: re.compile(aspect + r"\s*[:=]\s*" + _INT_TOKEN, re.IGNORECASE)
    for aspect in _ASPECTS
}


@dataclass(frozen=True)
class AlignmentVerdict:
    score: int
    passage_id: str
    outcome_id: str
    judge_backend: str


@dataclass(frozen=True)
class CategoryVerdict:
    predicted_label: str
    passage_id: str
    concept_id: str
    gold_label: str


@dataclass(frozen=True)
class ComprehensibilityVerdict:
    readability: int
    correctness: int
    coherence: int
    engagement: int
    passage_id: str

    def mean(self) -> float:
        return (self.readability + self.correctness + self.coherence + self.engagement) / 4.0


def render_alignment_prompt(
    passage_text: str, item: CurriculumItem, templates: TemplateSet = DEFAULT_TEMPLATES
) -> RenderedPrompt:
    if not passage_text.strip():
        raise ValueError("cannot judge an empty passage")
    return templates.render(
        PromptKind.JUDGE_ALIGNMENT,
        {
            "grade": item.grade,
            "concept": item.concept.name,
            "core_ideas": item.core_idea.text,
            "outcomes": item.outcome.text,
            "passage": passage_text,
        },
    )


def render_categorization_prompt(
    passage_text: str,
    candidates: Sequence[tuple[str, CurriculumItem]],
    templates: TemplateSet = DEFAULT_TEMPLATES,
) -> RenderedPrompt:
    """Candidate blocks in label order; classification needs alternatives."""
    if len(candidates) < 2:
        raise ValueError(f"need at least 2 candidate types, got {len(candidates)}")
    blocks = []
    for label, item in candidates:
        blocks.append(
            f'"Type": "{label}",\n'
            f'"Concept": "{item.concept.name}",\n'
            f'"Core Ideas": "{item.core_idea.text}",\n'
            f'"Learning Outcomes": "{item.outcome.text}",'
        )
    return templates.render(
        PromptKind.JUDGE_CATEGORIZE,
        {"categories": "\n".join(blocks), "passage": passage_text},
    )


def render_comprehensibility_prompt(
    passage_text: str,
    grade: int,
    topic: str = "",
    templates: TemplateSet = DEFAULT_TEMPLATES,
) -> RenderedPrompt:
    if grade not in GRADE_RANGE:
        raise ValueError(f"grade {grade} outside supported range 1-5")
    return templates.render(
        PromptKind.JUDGE_COMPREHENSIBILITY,
        {"grade": grade, "topic": topic, "passage": passage_text},
    )


def _parse_score(raw_response: str, token: str, what: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise MalformedVerdictError(
            f"{what} is not an integer: {token!r}", raw=raw_response
        ) from None
    if value not in SCORE_RANGE:
        raise MalformedVerdictError(f"{what} {value} outside 1-5", raw=raw_response)
    return value


def parse_alignment(response: str) -> int:
    """Integer after the last 'Alignment Score:' marker, validated in 1-5."""
    matches = _ALIGNMENT_RE.findall(response)
    if not matches:
        raise MalformedVerdictError("no 'Alignment Score:' marker found", raw=response)
    return _parse_score(response, matches[-1], "alignment score")


def parse_category(response: str, valid_labels: Iterable[str]) -> str:
    """Label after the last 'Predicted Type:' marker; must be a known type."""
    valid = set(valid_labels)
    matches = _CATEGORY_RE.findall(response)
    if not matches:
        raise MalformedVerdictError("no 'Predicted Type:' marker found", raw=response)
    label = matches[-1].upper()
    if label not in valid:
        raise MalformedVerdictError(
            f"predicted type {label!r} not among {sorted(valid)}", raw=response
        )
    return label


def parse_comprehensibility(response: str) -> tuple[int, int, int, int]:
    """(readability, correctness, coherence, engagement), order-independent."""
    scores = {}
    for aspect in _ASPECTS:
        matches = _ASPECT_RES[aspect].findall(response)
        if not matches:
            raise MalformedVerdictError(f"no '{aspect}:' score found", raw=response)
        scores[aspect] = _parse_score(response, matches[-1], f"{aspect} score")
    return tuple(scores[a] for a in _ASPECTS)  # type: ignore[return-value]


def categorization_accuracy(verdicts: Sequence[CategoryVerdict]) -> "AccuracyResult":
    if not verdicts:
        raise ValueError("cannot compute accuracy over zero verdicts")
    correct = sum(1 for v in verdicts if v.predicted_label == v.gold_label)
    return AccuracyResult(correct=correct, total=len(verdicts))


@dataclass(frozen=True)
class AccuracyResult:
    """Exact rational accuracy: the counts are the ground truth."""

    correct: int
    total: int

    @property
    def value(self) -> float:
        return self.correct / self.total

    def __float__(self) -> float:
        return self.value


def group_average(scores: Sequence[float], group_size: int) -> list[float]:
    """Means of consecutive groups, e.g. the per-topic average of 3 passages."""
    if group_size < 1:
        raise ValueError("group_size must be at least 1")
    if len(scores) % group_size != 0:
        raise ValueError(
            f"{len(scores)} scores do not divide into groups of {group_size}"
        )
    return [
        sum(scores[i : i + group_size]) / group_size
        for i in range(0, len(scores), group_size)
    ]


def ask_judge(
    gateway: Gateway,
    prompt: RenderedPrompt,
    parser: Callable[[str], object],
    reasks: int = DEFAULT_REASKS,
    nonce: str = "",
) -> tuple[object, Transcript]:
    """Send a judge prompt, re-asking identically on malformed verdicts.

    The prompt text never changes, but each re-ask carries a distinct
    request nonce so record/replay reproduces the whole exchange, including
    a recovery on the second or third attempt.  Raises the last
    MalformedVerdictError once the budget is spent.
    """
    last: MalformedVerdictError | None = None
    for attempt in range(reasks + 1):
        attempt_nonce = nonce
        if attempt:
            attempt_nonce = f"{nonce}|reask={attempt}" if nonce else f"reask={attempt}"
        transcript = gateway.call(gateway.request(prompt.text, nonce=attempt_nonce))
        try:
            return parser(transcript.response_text), transcript
        except MalformedVerdictError as exc:
            last = exc
    assert last is not None
    raise last
