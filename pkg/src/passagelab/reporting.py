"""Report bundle: comparison tables, per-grade series, word audits.

Emits both delimiter-separated tables and one structured report.json.
Table shapes follow the experiment conventions: a two-condition comparison
(metric, BASE, COGENT, p), a three-way comparison adding Human and all
pairwise p-values, a generation-length table of (grade, mode) rows by
backend columns, and a unique-word table with signed percent deltas.
"""

from __future__ import annotations

import json
import math
from typing import Any, Mapping, Sequence

from . import store as store_mod
from .errors import MissingInputError
from .promptkit import Mode
from .stats import (
    ComparisonTable,
    ScoreRecord,
    aggregate,
    format_p,
    format_percent_delta,
)
from .store import RunStore

READABILITY_INDICES = (
    "flesch_reading_ease",
    "flesch_kincaid_grade",
    "gunning_fog",
    "automated_readability_index",
    "coleman_liau",
)

ASPECTS = ("readability", "correctness", "coherence", "engagement")


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def score_records(run: RunStore) -> list[ScoreRecord]:
    alignment = run.read_rows(store_mod.VERDICTS_ALIGNMENT, required=True)
    comprehensibility = run.read_rows(store_mod.VERDICTS_COMPREHENSIBILITY, required=True)
    records = [
        ScoreRecord("Curriculum Alignment", int(r["grade"]), r["mode"], float(r["score"]))
        for r in alignment
    ]
    records += [
        ScoreRecord(
            "Comprehensibility",
            int(r["grade"]),
            r["mode"],
            _mean([r[a] for a in ASPECTS]),
        )
        for r in comprehensibility
    ]
    return records


def _two_way_tsv(table: ComparisonTable) -> str:
    lines = ["Metric\tBASE\tCOGENT\tp-value"]
    for row in table.rows:
        comp = next(
            (c for c in row.comparisons if set(c.conditions) == {"BASE", "COGENT"}), None
        )
        p_cell = format_p(comp.p_corrected) + comp.marker if comp else ""
        base = f"{row.means['BASE']:.2f}" if "BASE" in row.means else ""
        cogent = f"{row.means['COGENT']:.2f}" if "COGENT" in row.means else ""
        lines.append(f"{row.metric}\t{base}\t{cogent}\t{p_cell}")
    return "\n".join(lines) + "\n"


def _three_way_tsv(table: ComparisonTable) -> str:
    pairs = (("BASE", "COGENT"), ("BASE", "HUMAN"), ("COGENT", "HUMAN"))
    header = (
        "Metric\tBASE\tCOGENT\tHuman\tBASE vs COGENT\tBASE vs Human\tCOGENT vs Human"
    )
    lines = [header]
    for row in table.rows:
        cells = [row.metric]
        for cond in ("BASE", "COGENT", "HUMAN"):
            cells.append(f"{row.means[cond]:.2f}" if cond in row.means else "")
        by_pair = {frozenset(c.conditions): c for c in row.comparisons}
        for pair in pairs:
            comp = by_pair.get(frozenset(pair))
            cells.append(format_p(comp.p_corrected) + comp.marker if comp else "")
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def _word_count_table(passages: Sequence[Mapping[str, Any]]) -> str:
    """Generation-length means: (grade, mode) rows by backend columns."""
    generated = [p for p in passages if p["mode"] != Mode.HUMAN.value]
    backends = sorted({p["backend_id"] for p in generated})
    lines = ["Grade\tType\t" + "\t".join(backends)]
    grades = sorted({p["grade"] for p in generated})
    for grade in grades:
        for mode in (Mode.BASE.value, Mode.COGENT.value):
            cells = [str(grade), mode]
            for backend in backends:
                values = [
                    p["word_count"]
                    for p in generated
                    if p["grade"] == grade and p["mode"] == mode and p["backend_id"] == backend
                ]
                cells.append(f"{_mean(values):.2f}" if values else "")
            lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def _unique_words_table(readability: Sequence[Mapping[str, Any]]) -> str:
    """Per-grade unique-word means with signed deltas against HUMAN."""
    grades = sorted({r["grade"] for r in readability})
    lines = ["Grade\tHuman\tBASE\tCOGENT"]
    for grade in grades:
        def mean_for(mode: str) -> float | None:
            values = [
                r["unique_word_count"]
                for r in readability
                if r["grade"] == grade and r["mode"] == mode
            ]
            return _mean(values) if values else None

        human = mean_for(Mode.HUMAN.value)
        cells = [str(grade), f"{human:.1f}" if human is not None else ""]
        for mode in (Mode.BASE.value, Mode.COGENT.value):
            value = mean_for(mode)
            if value is None:
                cells.append("")
            elif human:
                cells.append(f"{value:.1f} ({format_percent_delta(value, human)})")
            else:
                cells.append(f"{value:.1f}")
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def _word_audit_csv(passages: Sequence[Mapping[str, Any]]) -> str:
    lines = ["passage_id,grade,mode,backend_id,word_count,word_target,deviation"]
    for p in sorted(passages, key=lambda r: r["passage_id"]):
        target = p["grade"] * 100
        deviation = (p["word_count"] - target) / target
        lines.append(
            f"{p['passage_id']},{p['grade']},{p['mode']},{p['backend_id'] or ''},"
            f"{p['word_count']},{target},{deviation:.6f}"
        )
    return "\n".join(lines) + "\n"


def _series_csv(rows: Sequence[tuple], header: str) -> str:
    return "\n".join([header] + [",".join(str(c) for c in row) for row in rows]) + "\n"


def _grade_series(
    rows: Sequence[Mapping[str, Any]], value_key: str, metric: str
) -> list[tuple]:
    out = []
    grades = sorted({r["grade"] for r in rows})
    modes = sorted({r["mode"] for r in rows})
    for grade in grades:
        for mode in modes:
            pool = [r for r in rows if r["grade"] == grade and r["mode"] == mode]
            if pool:
                out.append(
                    (metric, grade, mode, "ALL", f"{_mean([float(r[value_key]) for r in pool]):.6f}", len(pool))
                )
            backends = sorted({r["backend_id"] for r in pool if r["backend_id"]})
            for backend in backends:
                sub = [r for r in pool if r["backend_id"] == backend]
                out.append(
                    (metric, grade, mode, backend, f"{_mean([float(r[value_key]) for r in sub]):.6f}", len(sub))
                )
    return out


def run_report(run: RunStore, bonferroni_m: int) -> dict[str, Any]:
    """Emit the full report bundle; returns the structured report data."""
    passages = run.read_rows(store_mod.PASSAGES, required=True)
    readability = run.read_rows(store_mod.READABILITY)
    if not readability:
        raise MissingInputError(
            f"{store_mod.READABILITY} not found in run {run.run_id!r}; run analyze first"
        )
    records = score_records(run)
    category_rows = run.read_rows(store_mod.VERDICTS_CATEGORY)

    has_human = any(p["mode"] == Mode.HUMAN.value for p in passages)
    generated_scores = [r for r in records if r.condition != Mode.HUMAN.value]
    two_way = aggregate(
        generated_scores, m=bonferroni_m, condition_order=["BASE", "COGENT"]
    )
    three_way = (
        aggregate(records, m=bonferroni_m, condition_order=["BASE", "COGENT", "HUMAN"])
        if has_human
        else None
    )

    report_dir = run.report_dir()
    (report_dir / "comparison_base_cogent.tsv").write_text(
        _two_way_tsv(two_way), encoding="utf-8"
    )
    if three_way is not None:
        (report_dir / "comparison_three_way.tsv").write_text(
            _three_way_tsv(three_way), encoding="utf-8"
        )
    (report_dir / "word_counts.tsv").write_text(_word_count_table(passages), encoding="utf-8")
    (report_dir / "unique_words.tsv").write_text(
        _unique_words_table(readability), encoding="utf-8"
    )
    (report_dir / "word_audit.csv").write_text(_word_audit_csv(passages), encoding="utf-8")

    series_dir = report_dir / "series"
    series_dir.mkdir(exist_ok=True)
    alignment_rows = run.read_rows(store_mod.VERDICTS_ALIGNMENT)
    comp_rows = run.read_rows(store_mod.VERDICTS_COMPREHENSIBILITY)
    score_series = _grade_series(alignment_rows, "score", "curriculum_alignment")
    for aspect in ASPECTS:
        score_series += _grade_series(comp_rows, aspect, f"comprehensibility_{aspect}")
    comp_mean_rows = [r | {"mean4": _mean([r[a] for a in ASPECTS])} for r in comp_rows]
    score_series += _grade_series(comp_mean_rows, "mean4", "comprehensibility")
    (series_dir / "scores_by_grade.csv").write_text(
        _series_csv(score_series, "metric,grade,condition,backend,mean,n"), encoding="utf-8"
    )
    readability_series: list[tuple] = []
    for index in READABILITY_INDICES:
        readability_series += _grade_series(readability, index, index)
    readability_series += _grade_series(readability, "unique_word_count", "unique_words")
    readability_series += _grade_series(readability, "word_count", "words")
    (series_dir / "readability_by_grade.csv").write_text(
        _series_csv(readability_series, "metric,grade,condition,backend,mean,n"),
        encoding="utf-8",
    )

    accuracy: dict[str, dict[str, Any]] = {}
    for row in category_rows:
        key = f"{row['backend_id'] or 'human'}/{row['mode']}"
        bucket = accuracy.setdefault(key, {"correct": 0, "total": 0})
        bucket["total"] += 1
        bucket["correct"] += row["predicted_label"] == row["gold_label"]
    for bucket in accuracy.values():
        bucket["accuracy"] = bucket["correct"] / bucket["total"]
    accuracy_lines = ["backend\tmode\tcorrect\ttotal\taccuracy"]
    for key in sorted(accuracy):
        backend, mode = key.split("/", 1)
        b = accuracy[key]
        accuracy_lines.append(
            f"{backend}\t{mode}\t{b['correct']}\t{b['total']}\t{b['accuracy']:.4f}"
        )
    (report_dir / "accuracy.tsv").write_text("\n".join(accuracy_lines) + "\n", encoding="utf-8")

    judge_backends = sorted(
        {r["judge_backend"] for r in alignment_rows + comp_rows + category_rows if r.get("judge_backend")}
    )
    generation_backends = sorted(
        {p["backend_id"] for p in passages if p["backend_id"]}
    )
    failures = run.read_rows(store_mod.FAILURES)
    exceed_counts: dict[str, Any] = {}
    for r in readability:
        key = f"{r['grade']}/{r['mode']}"
        bucket = exceed_counts.setdefault(key, {"total": 0, "exceeding": 0})
        bucket["total"] += 1
        bucket["exceeding"] += bool(r["exceeds_target_grade"])

    report = {
        "bonferroni_m": bonferroni_m,
        "two_way": two_way.to_dict(),
        "three_way": three_way.to_dict() if three_way else None,
        "accuracy": accuracy,
        "judge_backends": judge_backends,
        "self_judging_backends": sorted(set(judge_backends) & set(generation_backends)),
        "grade_adherence": exceed_counts,
        "reconciliation": {
            "passages": len(passages),
            "passages_by_mode_backend": _tally(passages),
            "readability_rows": len(readability),
            "alignment_verdicts": len(alignment_rows),
            "comprehensibility_verdicts": len(comp_rows),
            "category_verdicts": len(category_rows),
            "failures": len(failures),
            "failures_by_stage": _tally(failures, key="stage"),
        },
    }
    (report_dir / "report.json").write_text(
        json.dumps(report, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    run.record_stage("report", {"bonferroni_m": bonferroni_m})
    return report


def _tally(rows: Sequence[Mapping[str, Any]], key: str | None = None) -> dict[str, int]:
    counts: dict[str, int] = {}
    for row in rows:
        if key is None:
            label = f"{row['mode']}/{row['backend_id'] or 'human'}"
        else:
            label = str(row.get(key, ""))
        counts[label] = counts.get(label, 0) + 1
    return dict(sorted(counts.items()))
