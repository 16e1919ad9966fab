"""Nonparametric comparison and aggregation.

Mann-Whitney U with mid-ranks.  Tie-free samples with at most 12 pooled
observations get an exact two-sided p-value by enumerating the null rank
distribution with integer arithmetic; everything else uses the normal
approximation with tie and continuity corrections.  Bonferroni correction
and grade-grouped comparison tables round out the module.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

EXACT_POOLED_LIMIT = 12  # C(12, 6) = 924 enumerated splits at worst


class Method(Enum):
    EXACT_ENUMERATION = "ExactEnumeration"
    NORMAL_APPROXIMATION = "NormalApproximation"


class Alternative(Enum):
    TWO_SIDED = "TwoSided"


@dataclass(frozen=True)
class MWUResult:
    u_statistic: float
    p_value: float
    method: Method
    n1: int
    n2: int
    tie_corrected: bool


def _midranks(pooled: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties assigned the mean of their rank block."""
    order = np.argsort(pooled, kind="mergesort")
    sorted_vals = pooled[order]
    block_start = np.r_[True, sorted_vals[1:] != sorted_vals[:-1]]
    edges = np.r_[np.flatnonzero(block_start), len(sorted_vals)]
    block_rank = 0.5 * (edges[:-1] + 1 + edges[1:])
    dense = np.cumsum(block_start) - 1
    ranks = np.empty(len(pooled))
    ranks[order] = block_rank[dense]
    return ranks


@lru_cache(maxsize=None)
def _u_counts(n1: int, n2: int) -> tuple[int, ...]:
    """Null distribution of U: counts over u = 0..n1*n2, tie-free case.

    Recursion on the largest pooled rank: if it belongs to the first
    sample it beats all n2 of the second, otherwise it beats none.
    """
    if n1 == 0 or n2 == 0:
        return (1,)
    out = [0] * (n1 * n2 + 1)
    for u, c in enumerate(_u_counts(n1 - 1, n2)):
        out[u + n2] += c
    for u, c in enumerate(_u_counts(n1, n2 - 1)):
        out[u] += c
    return tuple(out)


def mann_whitney_u(
    a: Sequence[float],
    b: Sequence[float],
    alternative: Alternative = Alternative.TWO_SIDED,
) -> MWUResult:
    """Two-sided Mann-Whitney U test; u_statistic is U of the first sample."""
    if alternative is not Alternative.TWO_SIDED:
        raise ValueError(f"unsupported alternative: {alternative!r}")
    n1, n2 = len(a), len(b)
    if n1 < 1 or n2 < 1:
        raise ValueError("both samples must be nonempty")
    pooled = np.asarray(list(a) + list(b), dtype=float)
    ranks = _midranks(pooled)
    u1 = float(ranks[:n1].sum()) - n1 * (n1 + 1) / 2.0
    has_ties = len(np.unique(pooled)) < len(pooled)

    if not has_ties and n1 + n2 <= EXACT_POOLED_LIMIT:
        counts = _u_counts(n1, n2)
        u_int = int(round(u1))
        # integer distance from the center, doubled to stay integral
        d_obs = abs(2 * u_int - n1 * n2)
        numerator = sum(c for u, c in enumerate(counts) if abs(2 * u - n1 * n2) >= d_obs)
        p = numerator / sum(counts)
        return MWUResult(u1, p, Method.EXACT_ENUMERATION, n1, n2, False)

    n = n1 + n2
    _, tie_sizes = np.unique(pooled, return_counts=True)
    tie_term = float(((tie_sizes**3) - tie_sizes).sum())
    variance = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if variance <= 0:
        return MWUResult(u1, 1.0, Method.NORMAL_APPROXIMATION, n1, n2, True)
    z = max(0.0, abs(u1 - n1 * n2 / 2.0) - 0.5) / math.sqrt(variance)
    p = min(1.0, math.erfc(z / math.sqrt(2.0)))
    return MWUResult(u1, p, Method.NORMAL_APPROXIMATION, n1, n2, bool(tie_term))


def bonferroni(p_values: Sequence[float], m: int) -> list[float]:
    """Multiply each p by the family size m, clamped to 1.0."""
    if not p_values:
        raise ValueError("no p-values to correct")
    if m < len(p_values):
        raise ValueError(f"family size m={m} is smaller than {len(p_values)} tests")
    return [min(1.0, p * m) for p in p_values]


def significance_marker(p: float) -> str:
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


@dataclass(frozen=True)
class ScoreRecord:
    """One observation: a metric value for a condition at a grade."""

    metric: str
    grade: int
    condition: str
    value: float


@dataclass(frozen=True)
class PairwiseComparison:
    conditions: tuple[str, str]
    u_statistic: float
    p_raw: float
    p_corrected: float
    marker: str
    method: Method


@dataclass(frozen=True)
class MetricRow:
    metric: str
    means: Mapping[str, float]
    counts: Mapping[str, int]
    comparisons: tuple[PairwiseComparison, ...]


@dataclass(frozen=True)
class GradeSeriesPoint:
    metric: str
    grade: int
    condition: str
    mean: float
    n: int


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[MetricRow, ...]
    per_grade: tuple[GradeSeriesPoint, ...]
    bonferroni_m: int

    def to_tsv(self) -> str:
        """Delimiter-separated rendering: metric, per-condition means, p-values."""
        conditions: list[str] = []
        for row in self.rows:
            for cond in row.means:
                if cond not in conditions:
                    conditions.append(cond)
        pair_labels: list[tuple[str, str]] = []
        for row in self.rows:
            for comp in row.comparisons:
                if comp.conditions not in pair_labels:
                    pair_labels.append(comp.conditions)
        header = ["Metric", *conditions, *(f"{x} vs {y}" for x, y in pair_labels)]
        lines = ["\t".join(header)]
        for row in self.rows:
            cells = [row.metric]
            cells += [
                f"{row.means[c]:.2f}" if c in row.means else "" for c in conditions
            ]
            by_pair = {c.conditions: c for c in row.comparisons}
            for pair in pair_labels:
                comp = by_pair.get(pair)
                cells.append("" if comp is None else format_p(comp.p_corrected) + comp.marker)
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "bonferroni_m": self.bonferroni_m,
            "rows": [
                {
                    "metric": r.metric,
                    "means": dict(r.means),
                    "counts": dict(r.counts),
                    "comparisons": [
                        {
                            "conditions": list(c.conditions),
                            "u": c.u_statistic,
                            "p_raw": c.p_raw,
                            "p_corrected": c.p_corrected,
                            "marker": c.marker,
                            "method": c.method.value,
                        }
                        for c in r.comparisons
                    ],
                }
                for r in self.rows
            ],
            "per_grade": [
                {
                    "metric": g.metric,
                    "grade": g.grade,
                    "condition": g.condition,
                    "mean": g.mean,
                    "n": g.n,
                }
                for g in self.per_grade
            ],
        }


def format_p(p: float) -> str:
    """Render a p-value in the reporting style: .021, .008, 1.000."""
    text = f"{p:.3f}"
    return text[1:] if text.startswith("0") else text


def aggregate(
    records: Iterable[ScoreRecord],
    m: int,
    condition_order: Sequence[str] | None = None,
) -> ComparisonTable:
    """Means per condition and grade plus pairwise corrected MWU tests.

    The Bonferroni family size m is an explicit input and is carried on the
    result so reports can state what was corrected for.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to aggregate")
    metrics: list[str] = []
    conditions: list[str] = []
    for rec in records:
        if rec.metric not in metrics:
            metrics.append(rec.metric)
        if rec.condition not in conditions:
            conditions.append(rec.condition)
    if condition_order:
        conditions = [c for c in condition_order if c in conditions] + [
            c for c in conditions if c not in condition_order
        ]

    rows = []
    per_grade: list[GradeSeriesPoint] = []
    for metric in metrics:
        subset = [r for r in records if r.metric == metric]
        values: dict[str, list[float]] = {}
        for rec in subset:
            values.setdefault(rec.condition, []).append(rec.value)
        present = [c for c in conditions if c in values]
        means = {c: math.fsum(values[c]) / len(values[c]) for c in present}
        counts = {c: len(values[c]) for c in present}
        comparisons = []
        for left, right in itertools.combinations(present, 2):
            res = mann_whitney_u(values[left], values[right])
            corrected = bonferroni([res.p_value], m)[0]
            comparisons.append(
                PairwiseComparison(
                    conditions=(left, right),
                    u_statistic=res.u_statistic,
                    p_raw=res.p_value,
                    p_corrected=corrected,
                    marker=significance_marker(corrected),
                    method=res.method,
                )
            )
        rows.append(MetricRow(metric, means, counts, tuple(comparisons)))
        grades = sorted({r.grade for r in subset})
        for grade in grades:
            for cond in present:
                vals = [r.value for r in subset if r.grade == grade and r.condition == cond]
                if vals:
                    per_grade.append(
                        GradeSeriesPoint(metric, grade, cond, math.fsum(vals) / len(vals), len(vals))
                    )
    return ComparisonTable(tuple(rows), tuple(per_grade), m)


def format_percent_delta(value: float, reference: float) -> str:
    """Signed one-decimal percent difference against a reference: +26.1%."""
    if reference == 0:
        raise ValueError("reference value must be nonzero")
    return f"{(value - reference) / reference * 100:+.1f}%"
