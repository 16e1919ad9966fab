"""Curriculum-guided science reading passage generation and evaluation.

The package splits into a deterministic core (curriculum, textmetrics,
promptkit, stats), a backend gateway with record/replay cassettes, a
judge harness, and the pipeline runner that stitches them together.
"""

from .curriculum import (
    CurriculumCatalog,
    CurriculumItem,
    enumerate_items,
    items_for_concept,
    load_catalog,
)
from .evaluator import (
    categorization_accuracy,
    group_average,
    parse_alignment,
    parse_category,
    parse_comprehensibility,
)
from .gateway import BackendConfig, ChatRequest, Gateway, mock_backend, replay_cassette
from .promptkit import (
    GenerationSpec,
    Mode,
    parse_topics,
    render_base_prompt,
    render_cogent_prompt,
    render_wonder_topics_prompt,
    word_target,
)
from .stats import bonferroni, mann_whitney_u
from .store import PassageRecord, RunStore
from .textmetrics import (
    ReadabilityReport,
    TextStats,
    readability_report,
    tokenize,
    unique_word_count,
)

__version__ = "0.1.0"

__all__ = [
    "BackendConfig",
    "ChatRequest",
    "CurriculumCatalog",
    "CurriculumItem",
    "Gateway",
    "GenerationSpec",
    "Mode",
    "PassageRecord",
    "ReadabilityReport",
    "RunStore",
    "TextStats",
    "bonferroni",
    "categorization_accuracy",
    "enumerate_items",
    "group_average",
    "items_for_concept",
    "load_catalog",
    "mann_whitney_u",
    "mock_backend",
    "parse_alignment",
    "parse_category",
    "parse_comprehensibility",
    "parse_topics",
    "readability_report",
    "render_base_prompt",
    "render_cogent_prompt",
    "render_wonder_topics_prompt",
    "replay_cassette",
    "tokenize",
    "unique_word_count",
    "word_target",
]
