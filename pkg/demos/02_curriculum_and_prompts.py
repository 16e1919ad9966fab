#!/usr/bin/env python3
"""From a curriculum catalog to rendered generation prompts.

Loads the bundled sample catalog, enumerates its curriculum items, labels
the candidate types under one concept, and renders the three prompt
families (wonder topics, plain, curriculum-guided) for one item.
"""

from pathlib import Path

from passagelab.curriculum import enumerate_items, items_for_concept, load_catalog
from passagelab.promptkit import (
    GenerationSpec,
    Mode,
    render_base_prompt,
    render_cogent_prompt,
    render_wonder_topics_prompt,
)

REPO = Path(__file__).resolve().parent.parent


def main() -> None:
    catalog = load_catalog(REPO / "data" / "sample_catalog.json")
    concepts, ideas = catalog.counts()
    print(f"catalog {catalog.standard_name!r}: {concepts} concepts, {ideas} core ideas, "
          f"{len(catalog.outcomes)} learning outcomes\n")

    items = enumerate_items(catalog)
    print("curriculum items (one per learning outcome):")
    for item in items:
        print(f"  grade {item.grade}  {item.concept.id:5s} {item.core_idea.id:7s} "
              f"{item.outcome.id}")

    print("\ncandidate types under concept ETS1 (for categorization):")
    for label, item in items_for_concept(catalog, "ETS1"):
        print(f"  Type {label}: {item.outcome.text}")

    item = catalog.item_for_outcome("1-LS1-1")
    print("\n=== wonder-topic prompt ===")
    print(render_wonder_topics_prompt(item, 5).text)

    topic = "Why do ducks have webbed feet?"
    print("\n=== plain (topic-only) prompt ===")
    print(render_base_prompt(GenerationSpec.for_item(item, Mode.BASE, topic)).text)

    print("\n=== curriculum-guided prompt ===")
    print(render_cogent_prompt(GenerationSpec.for_item(item, Mode.COGENT, topic)).text)


if __name__ == "__main__":
    main()
