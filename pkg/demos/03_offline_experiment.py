#!/usr/bin/env python3
"""Replay the full experiment offline from the shipped cassette.

Every backend call (topic generation, passage generation, judging) is
served from data/cassettes/desk.jsonl, so this runs with no network and
produces byte-identical outputs on every execution.
"""

import json
import tempfile
from pathlib import Path

from passagelab.config import build_gateways, load_config
from passagelab.promptkit import Mode
from passagelab.reporting import run_report
from passagelab.runner import (
    ingest_curriculum,
    ingest_reference_corpus,
    run_judging,
    run_passage_generation,
    run_readability,
    run_topic_generation,
)
from passagelab.store import RunStore

REPO = Path(__file__).resolve().parent.parent


def main() -> None:
    config = load_config(REPO / "data" / "sample_config.json")
    gateways = build_gateways(
        config, offline=True, cassette=REPO / "data" / "cassettes" / "desk.jsonl"
    )

    with tempfile.TemporaryDirectory(prefix="demo-run-") as workdir:
        run = RunStore(workdir, "demo")
        ingest_curriculum(run, REPO / "data" / "sample_catalog.json")
        ingest_reference_corpus(run, REPO / "data" / "sample_corpus.json")

        topics = run_topic_generation(
            run,
            gateways[config.topic_backend],
            n_generate=config.n_topics_generate,
            n_select=config.n_topics_select,
            seed=config.seed,
        )
        print(f"selected {len(topics)} wonder topics, e.g. {topics[0]['topic']!r}")

        for backend in config.backends:
            for mode in (Mode.BASE, Mode.COGENT):
                run_passage_generation(run, mode, gateways[backend.backend_id])
        print(f"replayed {len(run.read_passages())} passages "
              f"({len(config.backends)} backends x 2 modes + human references)")

        run_readability(run, grade_margin=config.grade_margin)
        counts = run_judging(run, gateways[config.judge.backend_id])
        print(f"judge verdicts: {counts}")

        report = run_report(run, bonferroni_m=config.bonferroni_m)
        report_dir = run.report_dir()
        print("\n--- plain vs guided (pooled over backends) ---")
        print((report_dir / "comparison_base_cogent.tsv").read_text(), end="")
        print("\n--- three-way comparison with the human references ---")
        print((report_dir / "comparison_three_way.tsv").read_text(), end="")
        print("\n--- unique words per grade ---")
        print((report_dir / "unique_words.tsv").read_text(), end="")
        print("\ncategorization accuracy by backend and mode:")
        print(json.dumps(report["accuracy"], indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
