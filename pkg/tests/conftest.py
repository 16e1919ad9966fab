from __future__ import annotations

import json
from pathlib import Path

import pytest

from passagelab.curriculum import load_catalog_data

DATA_DIR = Path(__file__).parent / "data"
REPO_DIR = Path(__file__).parent.parent
SAMPLE_CATALOG = REPO_DIR / "data" / "sample_catalog.json"
SAMPLE_CORPUS = REPO_DIR / "data" / "sample_corpus.json"
SAMPLE_CONFIG = REPO_DIR / "data" / "sample_config.json"
DESK_CASSETTE = REPO_DIR / "data" / "cassettes" / "desk.jsonl"


def small_catalog_data() -> dict:
    return {
        "standard": "TEST-K5",
        "domains": [
            {"code": "LS", "name": "Life Sciences"},
            {"code": "PS", "name": "Physical Sciences"},
        ],
        "concepts": [
            {
                "id": "LS1",
                "domain": "LS",
                "name": "Animal and Plant Body Parts",
                "core_ideas": [
                    {
                        "id": "LS1.A",
                        "text": "Plants and animals have outside parts that help them live and grow.",
                        "outcomes": [
                            {
                                "id": "1-LS1-1",
                                "text": "Describe how outside parts help animals meet their needs.",
                                "grade": 1,
                            },
                            {
                                "id": "4-LS1-1",
                                "text": "Argue from evidence that body structures serve survival functions.",
                                "grade": 4,
                            },
                        ],
                    },
                    {
                        "id": "LS1.B",
                        "text": "Many young animals look like their parents and learn from them.",
                        "outcomes": [
                            {
                                "id": "1-LS1-2",
                                "text": "Find patterns in how parents help their young survive.",
                                "grade": 1,
                            }
                        ],
                    },
                ],
            },
            {
                "id": "PS1",
                "domain": "PS",
                "name": "Matter and Materials",
                "core_ideas": [
                    {
                        "id": "PS1.A",
                        "text": "Objects are made of materials that can be sorted by observable properties.",
                        "outcomes": [
                            {
                                "id": "2-PS1-1",
                                "text": "Plan a test to sort materials by their properties.",
                                "grade": 2,
                            }
                        ],
                    }
                ],
            },
        ],
    }


@pytest.fixture
def small_catalog():
    return load_catalog_data(small_catalog_data())


@pytest.fixture
def small_catalog_file(tmp_path):
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps(small_catalog_data()), encoding="utf-8")
    return path


@pytest.fixture
def sample_item(small_catalog):
    return small_catalog.item_for_outcome("1-LS1-1")


def make_wide_catalog(n_concepts: int = 29, n_core_ideas: int = 79) -> dict:
    """Synthetic catalog with the protocol's shape: one outcome per core idea."""
    concepts = []
    idea_index = 0
    base = n_core_ideas // n_concepts
    extra = n_core_ideas % n_concepts
    for c in range(n_concepts):
        ideas = []
        for _ in range(base + (1 if c < extra else 0)):
            idea_index += 1
            grade = (idea_index - 1) % 5 + 1
            ideas.append(
                {
                    "id": f"CI{idea_index:03d}",
                    "text": f"Core idea number {idea_index} about everyday science.",
                    "outcomes": [
                        {
                            "id": f"LO{idea_index:03d}",
                            "text": f"Learning outcome {idea_index} for grade {grade}.",
                            "grade": grade,
                        }
                    ],
                }
            )
        concepts.append(
            {
                "id": f"C{c + 1:02d}",
                "domain": "SCI",
                "name": f"Concept {c + 1}",
                "core_ideas": ideas,
            }
        )
    return {
        "standard": "WIDE-TEST",
        "domains": [{"code": "SCI", "name": "Science"}],
        "concepts": concepts,
    }
