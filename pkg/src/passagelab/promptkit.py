"""Prompt rendering for topic generation and passage generation.

Templates live as plain text files with {{name}} placeholders (the six
shipped defaults are under passagelab/templates/).  Rendering is a pure
function of its inputs; substitution happens in a single pass so values
are never re-scanned for placeholders.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping

from .curriculum import GRADE_RANGE, CurriculumItem
from .errors import GradeRangeError, MalformedResponseError, TemplateError

DEFAULT_READABILITY_TARGET = "Flesch Kincaid Grade Level"

_PLACEHOLDER_RE = re.compile(r"\{\{([A-Za-z_][A-Za-z0-9_]*)\}\}")
_TOPIC_LINE_RE = re.compile(r"^\s*\d+\s*[.)]\s*(.+?)\s*$")


class PromptKind(Enum):
    WONDER_TOPICS = "wonder"
    BASE = "base"
    COGENT = "cogent"
    JUDGE_ALIGNMENT = "judge_alignment"
    JUDGE_CATEGORIZE = "judge_categorize"
    JUDGE_COMPREHENSIBILITY = "judge_comprehensibility"


class Mode(str, Enum):
    BASE = "BASE"
    COGENT = "COGENT"
    HUMAN = "HUMAN"


@dataclass(frozen=True)
class RenderedPrompt:
    kind: PromptKind
    text: str
    placeholders_resolved: Mapping[str, str]


@dataclass(frozen=True)
class GenerationSpec:
    """Everything needed to render one passage-generation prompt."""

    item: CurriculumItem
    mode: Mode
    topic: str
    word_target: int
    readability_target: str = DEFAULT_READABILITY_TARGET

    def __post_init__(self) -> None:
        if self.mode not in (Mode.BASE, Mode.COGENT):
            raise ValueError(f"generation mode must be BASE or COGENT, got {self.mode}")
        if self.word_target <= 0:
            raise ValueError(f"word_target must be positive, got {self.word_target}")
        if not self.topic:
            raise ValueError("topic must be nonempty for passage prompts")

    @classmethod
    def for_item(cls, item: CurriculumItem, mode: Mode, topic: str) -> "GenerationSpec":
        return cls(item=item, mode=mode, topic=topic, word_target=word_target(item.grade))


def word_target(grade: int) -> int:
    """Target passage length: grade times 100 words."""
    if grade not in GRADE_RANGE:
        raise GradeRangeError(f"grade {grade} outside supported range 1-5", grade=grade)
    return grade * 100


class TemplateSet:
    """Loads and renders the named templates from a directory."""

    def __init__(self, directory: str | Path | None = None):
        self._directory = Path(directory) if directory is not None else None
        self._cache: dict[PromptKind, str] = {}

    def raw(self, kind: PromptKind) -> str:
        if kind not in self._cache:
            name = f"{kind.value}.txt"
            if self._directory is not None:
                path = self._directory / name
                if not path.is_file():
                    raise TemplateError(f"template file not found: {path}")
                text = path.read_text(encoding="utf-8")
            else:
                ref = resources.files("passagelab").joinpath("templates", name)
                text = ref.read_text(encoding="utf-8")
            self._cache[kind] = text
        return self._cache[kind]

    def render(self, kind: PromptKind, values: Mapping[str, object]) -> RenderedPrompt:
        template = self.raw(kind)
        resolved: dict[str, str] = {}
        missing: set[str] = set()

        def substitute(match: re.Match[str]) -> str:
            name = match.group(1)
            if name not in values:
                missing.add(name)
                return match.group(0)
            resolved[name] = str(values[name])
            return resolved[name]

        text = _PLACEHOLDER_RE.sub(substitute, template)
        if missing:
            raise TemplateError(
                f"unresolved placeholders in {kind.value} template: {sorted(missing)}"
            )
        return RenderedPrompt(kind=kind, text=text, placeholders_resolved=resolved)

    def digests(self) -> dict[str, str]:
        import hashlib

        return {
            kind.value: hashlib.sha256(self.raw(kind).encode("utf-8")).hexdigest()
            for kind in PromptKind
        }


DEFAULT_TEMPLATES = TemplateSet()


def render_wonder_topics_prompt(
    item: CurriculumItem,
    n_topics: int,
    templates: TemplateSet = DEFAULT_TEMPLATES,
    readability_target: str = DEFAULT_READABILITY_TARGET,
) -> RenderedPrompt:
    """Prompt asking for n_topics short wonder questions for one item."""
    if n_topics < 1:
        raise ValueError(f"n_topics must be at least 1, got {n_topics}")
    return templates.render(
        PromptKind.WONDER_TOPICS,
        {
            "grade": item.grade,
            "n_topics": n_topics,
            "concept": item.concept.name,
            "core_ideas": item.core_idea.text,
            "outcomes": item.outcome.text,
            "readability_target": readability_target,
        },
    )


def render_base_prompt(
    spec: GenerationSpec, templates: TemplateSet = DEFAULT_TEMPLATES
) -> RenderedPrompt:
    """Topic-only passage prompt; carries no curriculum sections."""
    if spec.mode is not Mode.BASE:
        raise ValueError(f"expected a BASE spec, got mode {spec.mode}")
    return templates.render(
        PromptKind.BASE,
        {"grade": spec.item.grade, "word_target": spec.word_target, "topic": spec.topic},
    )


def render_cogent_prompt(
    spec: GenerationSpec, templates: TemplateSet = DEFAULT_TEMPLATES
) -> RenderedPrompt:
    """Curriculum-guided passage prompt with concept, core idea and outcome."""
    if spec.mode is not Mode.COGENT:
        raise ValueError(f"expected a COGENT spec, got mode {spec.mode}")
    return templates.render(
        PromptKind.COGENT,
        {
            "grade": spec.item.grade,
            "word_target": spec.word_target,
            "topic": spec.topic,
            "concept": spec.item.concept.name,
            "core_ideas": spec.item.core_idea.text,
            "outcomes": spec.item.outcome.text,
            "readability_target": spec.readability_target,
        },
    )


def render_generation_prompt(
    spec: GenerationSpec, templates: TemplateSet = DEFAULT_TEMPLATES
) -> RenderedPrompt:
    if spec.mode is Mode.BASE:
        return render_base_prompt(spec, templates)
    return render_cogent_prompt(spec, templates)


def parse_topics(response: str, n_expected: int) -> list[str]:
    """Extract numbered-list topics; error if fewer than expected parse."""
    topics = []
    for line in response.splitlines():
        match = _TOPIC_LINE_RE.match(line)
        if match:
            topics.append(match.group(1))
    if len(topics) < n_expected:
        raise MalformedResponseError(
            f"expected {n_expected} topics, parsed {len(topics)}", raw=response
        )
    return topics
