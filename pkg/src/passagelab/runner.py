"""End-to-end experiment stages: ingest, generate, analyze, judge.

Each stage reads and writes the run store deterministically (results are
collected, sorted, then written), records itself in the run manifest, and
survives individual backend failures by writing failure rows instead of
aborting the batch.
"""

from __future__ import annotations

import hashlib
import json
import random
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import evaluator, store as store_mod, textmetrics
from .curriculum import (
    CurriculumCatalog,
    CurriculumItem,
    enumerate_items,
    items_for_concept,
    load_catalog,
    save_catalog,
)
from .errors import (
    BackendError,
    CorpusError,
    DataError,
    MalformedResponseError,
    MalformedVerdictError,
    MissingInputError,
)
from .evaluator import (
    parse_alignment,
    parse_category,
    parse_comprehensibility,
    render_alignment_prompt,
    render_categorization_prompt,
    render_comprehensibility_prompt,
)
from .gateway import Gateway
from .promptkit import (
    GenerationSpec,
    Mode,
    TemplateSet,
    DEFAULT_TEMPLATES,
    parse_topics,
    render_generation_prompt,
    render_wonder_topics_prompt,
)
from .store import PassageRecord, RunStore, content_hash

CATALOG_FILE = "catalog.json"
CORPUS_ANNOTATIONS = "corpus_annotations.jsonl"
CORPUS_SUMMARY = "corpus_summary.tsv"

JUDGE_TASKS = ("alignment", "categorize", "comprehensibility")


def _item_seed(seed: int, outcome_id: str) -> int:
    digest = hashlib.sha256(f"{seed}:{outcome_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _replace_failures(run: RunStore, stage: str, rows: list[dict[str, Any]]) -> None:
    existing = [r for r in run.read_rows(store_mod.FAILURES) if r.get("stage") != stage]
    merged = existing + rows
    run.write_rows(
        store_mod.FAILURES,
        merged,
        sort_key=lambda r: (r.get("stage", ""), store_mod.canonical_json(r)),
    )


_BACKEND_FAILURE_KINDS = {
    "TransportError",
    "AuthError",
    "ReplayMissError",
    "NoMatchingRuleError",
}


def _check_total_outage(successes: int, failures: list[dict[str, Any]], stage: str) -> None:
    """Individual failures become rows; a stage that achieved nothing and hit
    only backend faults is a backend outage and should abort loudly."""
    if successes == 0 and failures and all(
        f["kind"] in _BACKEND_FAILURE_KINDS for f in failures
    ):
        raise BackendError(
            f"{stage}: all {len(failures)} requests failed "
            f"(first: {failures[0]['message']})"
        )


def _load_run_catalog(run: RunStore) -> CurriculumCatalog:
    path = run.path(CATALOG_FILE)
    if not path.exists():
        raise MissingInputError(
            f"{CATALOG_FILE} not found in run {run.run_id!r}; ingest a curriculum first"
        )
    return load_catalog(path)


def ingest_curriculum(run: RunStore, catalog_path: str | Path) -> CurriculumCatalog:
    """Validate a catalog file and snapshot it into the run directory."""
    catalog = load_catalog(catalog_path)
    save_catalog(catalog, run.path(CATALOG_FILE))
    run.record_stage(
        "ingest-curriculum",
        {"path": str(catalog_path), "source_sha256": store_mod.file_digest(catalog_path)},
    )
    return catalog


def run_topic_generation(
    run: RunStore,
    gateway: Gateway,
    n_generate: int,
    n_select: int,
    seed: int,
    templates: TemplateSet = DEFAULT_TEMPLATES,
    reasks: int = 2,
) -> list[dict[str, Any]]:
    """One wonder-topic call per curriculum item, seeded selection of n_select."""
    if n_select > n_generate:
        raise DataError(f"cannot select {n_select} of {n_generate} topics")
    catalog = _load_run_catalog(run)
    items = enumerate_items(catalog)
    rows: list[dict[str, Any]] = []
    failures: list[dict[str, Any]] = []

    def one_item(item: CurriculumItem):
        prompt = render_wonder_topics_prompt(item, n_generate, templates)
        last_raw = ""
        for attempt in range(reasks + 1):
            # distinct nonce per re-ask keeps record/replay faithful
            request = gateway.request(
                prompt.text, nonce=f"reask={attempt}" if attempt else ""
            )
            transcript = gateway.call(request)
            last_raw = transcript.response_text
            try:
                topics = parse_topics(transcript.response_text, n_generate)
            except MalformedResponseError:
                continue
            rng = random.Random(_item_seed(seed, item.outcome.id))
            picked = rng.sample(topics, n_select)
            return [
                {
                    "topic_id": content_hash({"outcome_id": item.outcome.id, "topic": t}),
                    "concept_id": item.concept.id,
                    "core_idea_id": item.core_idea.id,
                    "outcome_id": item.outcome.id,
                    "grade": item.grade,
                    "topic": t,
                    "pick_index": i,
                    "source_fingerprint": transcript.fingerprint,
                }
                for i, t in enumerate(picked)
            ]
        raise MalformedResponseError(
            f"no parseable topic list for item {item.outcome.id} after {reasks + 1} attempts",
            raw=last_raw,
        )

    with ThreadPoolExecutor(max_workers=gateway.config.max_concurrent) as pool:
        futures = {pool.submit(one_item, item): item for item in items}
        for future, item in futures.items():
            try:
                rows.extend(future.result())
            except (MalformedResponseError, BackendError) as exc:
                failures.append(
                    {
                        "stage": "gen-topics",
                        "kind": type(exc).__name__,
                        "outcome_id": item.outcome.id,
                        "message": str(exc),
                    }
                )

    run.write_rows(
        store_mod.TOPICS,
        rows,
        sort_key=lambda r: (r["concept_id"], r["core_idea_id"], r["outcome_id"], r["pick_index"]),
    )
    _replace_failures(run, "gen-topics", failures)
    _check_total_outage(len(rows), failures, "gen-topics")
    run.update_manifest(templates=templates.digests())
    run.record_stage(
        "gen-topics",
        {
            "backend": gateway.backend_id,
            "n_generate": n_generate,
            "n_select": n_select,
            "seed": seed,
        },
    )
    return rows


def run_passage_generation(
    run: RunStore,
    mode: Mode,
    gateway: Gateway,
    passages_per_topic: int = 1,
    templates: TemplateSet = DEFAULT_TEMPLATES,
) -> list[PassageRecord]:
    """One generation call per (topic, repetition) for one mode and backend."""
    if mode not in (Mode.BASE, Mode.COGENT):
        raise DataError(f"generation mode must be BASE or COGENT, got {mode}")
    catalog = _load_run_catalog(run)
    topic_rows = run.read_rows(store_mod.TOPICS, required=True)
    failures: list[dict[str, Any]] = []
    records: list[PassageRecord] = []

    def one_call(topic_row: Mapping[str, Any], repetition: int) -> PassageRecord:
        item = catalog.item_for_outcome(topic_row["outcome_id"])
        spec = GenerationSpec.for_item(item, mode, topic_row["topic"])
        prompt = render_generation_prompt(spec, templates)
        nonce = f"rep={repetition}" if passages_per_topic > 1 else ""
        transcript = gateway.call(gateway.request(prompt.text, nonce=nonce))
        text = transcript.response_text
        return PassageRecord.create(
            mode=mode,
            backend_id=gateway.backend_id,
            grade=item.grade,
            concept_id=item.concept.id,
            core_idea_id=item.core_idea.id,
            outcome_id=item.outcome.id,
            topic=topic_row["topic"],
            text=text,
            word_count=textmetrics.tokenize(text).word_count,
            created=transcript.timestamp,
            fingerprint=transcript.fingerprint,
            repetition=repetition,
        )

    jobs = [(row, rep) for row in topic_rows for rep in range(passages_per_topic)]
    with ThreadPoolExecutor(max_workers=gateway.config.max_concurrent) as pool:
        futures = {pool.submit(one_call, row, rep): (row, rep) for row, rep in jobs}
        for future, (row, rep) in futures.items():
            try:
                records.append(future.result())
            except BackendError as exc:
                failures.append(
                    {
                        "stage": "gen-passages",
                        "kind": type(exc).__name__,
                        "mode": mode.value,
                        "backend_id": gateway.backend_id,
                        "outcome_id": row["outcome_id"],
                        "topic": row["topic"],
                        "repetition": rep,
                        "message": str(exc),
                    }
                )

    existing = [
        r
        for r in run.read_passages()
        if not (r.mode is mode and r.backend_id == gateway.backend_id)
    ]
    run.write_passages(existing + records)
    _replace_failures(run, "gen-passages", failures)
    _check_total_outage(len(records), failures, "gen-passages")
    run.update_manifest(templates=templates.digests())
    manifest = run.load_manifest()
    params = {
        "mode": mode.value,
        "backend": gateway.backend_id,
        "passages_per_topic": passages_per_topic,
    }
    stages = [
        s
        for s in manifest.get("stages", [])
        if not (s["op"] == "gen-passages" and s["params"] == params)
    ]
    stages.append({"op": "gen-passages", "params": params})
    manifest["stages"] = stages
    manifest["outputs"] = run.output_digests()
    run.save_manifest(manifest)
    return records


def ingest_reference_corpus(run: RunStore, corpus_path: str | Path) -> list[PassageRecord]:
    """Load annotated human-written passages as HUMAN records."""
    catalog = _load_run_catalog(run)
    try:
        data = json.loads(Path(corpus_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"corpus is not valid JSON: {exc}") from exc
    entries = data.get("passages") if isinstance(data, dict) else None
    if not isinstance(entries, list):
        raise CorpusError("corpus must be an object with a 'passages' list")

    records: list[PassageRecord] = []
    annotations: list[dict[str, Any]] = []
    seen_texts: dict[str, str] = {}
    for i, entry in enumerate(entries):
        name = entry.get("id", f"passages[{i}]") if isinstance(entry, dict) else f"passages[{i}]"
        if not isinstance(entry, dict):
            raise CorpusError(f"corpus entry {name} must be an object")
        for key in ("grade", "topic", "item", "text", "metrics"):
            if key not in entry:
                raise CorpusError(f"corpus entry {name} is missing annotation {key!r}")
        item_ref = entry["item"]
        if not isinstance(item_ref, dict) or not {"concept", "core_idea", "outcome"} <= set(
            item_ref
        ):
            raise CorpusError(
                f"corpus entry {name} item must reference concept, core_idea and outcome"
            )
        item = catalog.item_for_outcome(item_ref["outcome"])
        if item.concept.id != item_ref["concept"] or item.core_idea.id != item_ref["core_idea"]:
            raise CorpusError(f"corpus entry {name} item reference is inconsistent")
        grade = entry["grade"]
        if grade != item.grade:
            raise CorpusError(
                f"corpus entry {name} grade {grade} does not match outcome grade {item.grade}"
            )
        text = entry["text"]
        if not text.strip():
            raise CorpusError(f"corpus entry {name} has empty text")
        text_hash = content_hash(text)
        if text_hash in seen_texts:
            warnings.warn(
                f"corpus entry {name} duplicates {seen_texts[text_hash]}; skipping",
                stacklevel=2,
            )
            continue
        seen_texts[text_hash] = name
        record = PassageRecord.create(
            mode=Mode.HUMAN,
            backend_id=None,
            grade=grade,
            concept_id=item.concept.id,
            core_idea_id=item.core_idea.id,
            outcome_id=item.outcome.id,
            topic=entry["topic"],
            text=text,
            word_count=textmetrics.tokenize(text).word_count,
        )
        records.append(record)
        annotations.append(
            {
                "passage_id": record.passage_id,
                "source_id": name,
                "published_metrics": entry["metrics"],
            }
        )

    existing = [r for r in run.read_passages() if r.mode is not Mode.HUMAN]
    run.write_passages(existing + records)
    run.write_rows(CORPUS_ANNOTATIONS, annotations, sort_key=lambda r: r["passage_id"])

    by_grade: dict[int, list[PassageRecord]] = {}
    for record in records:
        by_grade.setdefault(record.grade, []).append(record)
    lines = ["Grade\tPassages\tAvg. words\tAvg. unique words"]
    for grade in sorted(by_grade):
        group = by_grade[grade]
        words = sum(r.word_count for r in group) / len(group)
        uniques = sum(textmetrics.unique_word_count(r.text) for r in group) / len(group)
        lines.append(f"{grade}\t{len(group)}\t{words:.1f}\t{uniques:.1f}")
    run.path(CORPUS_SUMMARY).write_text("\n".join(lines) + "\n", encoding="utf-8")

    run.record_stage(
        "ingest-corpus",
        {"path": str(corpus_path), "source_sha256": store_mod.file_digest(corpus_path)},
    )
    return records


def run_readability(run: RunStore, grade_margin: float = 1.0) -> list[dict[str, Any]]:
    """One readability report row per passage record, with adherence flags."""
    rows = []
    for record in run.read_passages(required=True):
        report = textmetrics.readability_report(record.text)
        target = record.grade * 100
        excess = report.flesch_kincaid_grade - record.grade
        rows.append(
            {
                "passage_id": record.passage_id,
                "mode": record.mode.value,
                "backend_id": record.backend_id,
                "grade": record.grade,
                "flesch_reading_ease": report.flesch_reading_ease,
                "flesch_kincaid_grade": report.flesch_kincaid_grade,
                "gunning_fog": report.gunning_fog,
                "automated_readability_index": report.automated_readability_index,
                "coleman_liau": report.coleman_liau,
                "word_count": report.stats.word_count,
                "unique_word_count": report.stats.unique_word_count,
                "sentence_count": report.stats.sentence_count,
                "syllable_count": report.stats.syllable_count,
                "word_target": target,
                "word_deviation": (record.word_count - target) / target,
                "fkgl_excess": excess,
                "exceeds_target_grade": excess > grade_margin,
            }
        )
    run.write_rows(store_mod.READABILITY, rows, sort_key=lambda r: r["passage_id"])
    run.record_stage("analyze", {"grade_margin": grade_margin})
    return rows


def run_judging(
    run: RunStore,
    judge: Gateway,
    tasks: Sequence[str] = JUDGE_TASKS,
    templates: TemplateSet = DEFAULT_TEMPLATES,
    reasks: int = 2,
    repetitions: int = 1,
) -> dict[str, int]:
    """Judge every stored passage with the requested tasks.

    Categorization is only possible where the passage's concept offers at
    least two candidate types; passages under single-outcome concepts are
    counted as skipped in the returned tally.
    """
    unknown = set(tasks) - set(JUDGE_TASKS)
    if unknown:
        raise DataError(f"unknown judge tasks: {sorted(unknown)}")
    catalog = _load_run_catalog(run)
    records = run.read_passages(required=True)
    failures: list[dict[str, Any]] = []
    alignment_rows: list[dict[str, Any]] = []
    category_rows: list[dict[str, Any]] = []
    comprehensibility_rows: list[dict[str, Any]] = []
    counts = {"alignment": 0, "categorize": 0, "comprehensibility": 0, "categorize_skipped": 0}
    candidates_by_concept = {
        concept.id: items_for_concept(catalog, concept.id) for concept in catalog.concepts
    }

    def judge_one(record: PassageRecord, task: str, repetition: int) -> dict[str, Any]:
        nonce = f"judge-rep={repetition}" if repetitions > 1 else ""
        base = {
            "passage_id": record.passage_id,
            "mode": record.mode.value,
            "backend_id": record.backend_id,
            "grade": record.grade,
            "judge_backend": judge.backend_id,
            "repetition": repetition,
        }
        if task == "alignment":
            item = catalog.item_for_outcome(record.outcome_id)
            prompt = render_alignment_prompt(record.text, item, templates)
            verdict, transcript = evaluator.ask_judge(
                judge, prompt, parse_alignment, reasks=reasks, nonce=nonce
            )
            return base | {
                "outcome_id": record.outcome_id,
                "score": verdict,
                "fingerprint": transcript.fingerprint,
            }
        if task == "categorize":
            candidates = candidates_by_concept[record.concept_id]
            labels = [label for label, _ in candidates]
            gold = next(
                label
                for label, item in candidates
                if item.outcome.id == record.outcome_id
            )
            prompt = render_categorization_prompt(record.text, candidates, templates)
            verdict, transcript = evaluator.ask_judge(
                judge,
                prompt,
                lambda text: parse_category(text, labels),
                reasks=reasks,
                nonce=nonce,
            )
            return base | {
                "concept_id": record.concept_id,
                "gold_label": gold,
                "predicted_label": verdict,
                "fingerprint": transcript.fingerprint,
            }
        prompt = render_comprehensibility_prompt(
            record.text, record.grade, record.topic, templates
        )
        verdict, transcript = evaluator.ask_judge(
            judge, prompt, parse_comprehensibility, reasks=reasks, nonce=nonce
        )
        readability, correctness, coherence, engagement = verdict
        return base | {
            "readability": readability,
            "correctness": correctness,
            "coherence": coherence,
            "engagement": engagement,
            "fingerprint": transcript.fingerprint,
        }

    # The judge gateway's nonce must differ per repetition; within one
    # repetition every (record, task) pair renders a distinct prompt.
    jobs = []
    for record in records:
        for task in tasks:
            if task == "categorize" and len(candidates_by_concept[record.concept_id]) < 2:
                counts["categorize_skipped"] += 1
                continue
            for repetition in range(repetitions):
                jobs.append((record, task, repetition))

    with ThreadPoolExecutor(max_workers=judge.config.max_concurrent) as pool:
        futures = {
            pool.submit(judge_one, record, task, rep): (record, task, rep)
            for record, task, rep in jobs
        }
        for future, (record, task, rep) in futures.items():
            try:
                row = future.result()
            except (MalformedVerdictError, BackendError) as exc:
                failures.append(
                    {
                        "stage": "judge",
                        "kind": type(exc).__name__,
                        "task": task,
                        "passage_id": record.passage_id,
                        "repetition": rep,
                        "message": str(exc),
                    }
                )
                continue
            counts[task] += 1
            if task == "alignment":
                alignment_rows.append(row)
            elif task == "categorize":
                category_rows.append(row)
            else:
                comprehensibility_rows.append(row)

    sort_key = lambda r: (r["passage_id"], r["repetition"])  # noqa: E731
    if "alignment" in tasks:
        run.write_rows(store_mod.VERDICTS_ALIGNMENT, alignment_rows, sort_key=sort_key)
    if "categorize" in tasks:
        run.write_rows(store_mod.VERDICTS_CATEGORY, category_rows, sort_key=sort_key)
    if "comprehensibility" in tasks:
        run.write_rows(
            store_mod.VERDICTS_COMPREHENSIBILITY, comprehensibility_rows, sort_key=sort_key
        )
    _replace_failures(run, "judge", failures)
    _check_total_outage(
        counts["alignment"] + counts["categorize"] + counts["comprehensibility"],
        failures,
        "judge",
    )
    run.update_manifest(templates=templates.digests())
    run.record_stage(
        "judge",
        {
            "judge": judge.backend_id,
            "tasks": sorted(tasks),
            "repetitions": repetitions,
        },
    )
    return counts
