"""Run persistence: line-delimited record stores, content hashing, manifest.

Every store is a JSONL file written in one deterministic pass (records
sorted, keys sorted, compact separators) so byte-identical inputs always
produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

from .errors import MissingInputError
from .promptkit import Mode


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def content_hash(data: Any) -> str:
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


def file_digest(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass(frozen=True)
class PassageRecord:
    """One generated or human-reference passage."""

    passage_id: str
    mode: Mode
    backend_id: str | None
    grade: int
    concept_id: str
    core_idea_id: str
    outcome_id: str
    topic: str
    text: str
    word_count: int
    created: str | None = None
    fingerprint: str | None = None
    repetition: int = 0

    @classmethod
    def create(
        cls,
        mode: Mode,
        backend_id: str | None,
        grade: int,
        concept_id: str,
        core_idea_id: str,
        outcome_id: str,
        topic: str,
        text: str,
        word_count: int,
        created: str | None = None,
        fingerprint: str | None = None,
        repetition: int = 0,
    ) -> "PassageRecord":
        passage_id = content_hash(
            {
                "mode": mode.value,
                "backend_id": backend_id,
                "grade": grade,
                "outcome_id": outcome_id,
                "topic": topic,
                "text": text,
                "repetition": repetition,
            }
        )
        return cls(
            passage_id=passage_id,
            mode=mode,
            backend_id=backend_id,
            grade=grade,
            concept_id=concept_id,
            core_idea_id=core_idea_id,
            outcome_id=outcome_id,
            topic=topic,
            text=text,
            word_count=word_count,
            created=created,
            fingerprint=fingerprint,
            repetition=repetition,
        )

    def to_row(self) -> dict[str, Any]:
        return {
            "passage_id": self.passage_id,
            "mode": self.mode.value,
            "backend_id": self.backend_id,
            "grade": self.grade,
            "concept_id": self.concept_id,
            "core_idea_id": self.core_idea_id,
            "outcome_id": self.outcome_id,
            "topic": self.topic,
            "text": self.text,
            "word_count": self.word_count,
            "created": self.created,
            "fingerprint": self.fingerprint,
            "repetition": self.repetition,
        }

    @classmethod
    def from_row(cls, row: Mapping[str, Any]) -> "PassageRecord":
        return cls(
            passage_id=row["passage_id"],
            mode=Mode(row["mode"]),
            backend_id=row["backend_id"],
            grade=int(row["grade"]),
            concept_id=row["concept_id"],
            core_idea_id=row["core_idea_id"],
            outcome_id=row["outcome_id"],
            topic=row["topic"],
            text=row["text"],
            word_count=int(row["word_count"]),
            created=row.get("created"),
            fingerprint=row.get("fingerprint"),
            repetition=int(row.get("repetition", 0)),
        )


# File names inside one run directory.
TOPICS = "topics.jsonl"
PASSAGES = "passages.jsonl"
READABILITY = "readability.jsonl"
VERDICTS_ALIGNMENT = "verdicts_alignment.jsonl"
VERDICTS_CATEGORY = "verdicts_category.jsonl"
VERDICTS_COMPREHENSIBILITY = "verdicts_comprehensibility.jsonl"
FAILURES = "failures.jsonl"
MANIFEST = "manifest.json"
REPORT_DIR = "report"


class RunStore:
    """All artifacts of one experiment run live under a single directory."""

    def __init__(self, root: str | Path, run_id: str):
        self.run_id = run_id
        self.root = Path(root) / run_id
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.root / name

    def report_dir(self) -> Path:
        path = self.root / REPORT_DIR
        path.mkdir(parents=True, exist_ok=True)
        return path

    def write_rows(self, name: str, rows: Iterable[Mapping[str, Any]], sort_key=None) -> Path:
        """Replace a store with sorted rows, one canonical JSON object per line."""
        rows = list(rows)
        if sort_key is not None:
            rows.sort(key=sort_key)
        path = self.path(name)
        with open(path, "w", encoding="utf-8") as handle:
            for row in rows:
                handle.write(canonical_json(row) + "\n")
        return path

    def append_rows(self, name: str, rows: Iterable[Mapping[str, Any]]) -> Path:
        path = self.path(name)
        with open(path, "a", encoding="utf-8") as handle:
            for row in rows:
                handle.write(canonical_json(row) + "\n")
        return path

    def read_rows(self, name: str, required: bool = False) -> list[dict[str, Any]]:
        path = self.path(name)
        if not path.exists():
            if required:
                raise MissingInputError(
                    f"{name} not found in run {self.run_id!r}; run the producing stage first"
                )
            return []
        rows = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    rows.append(json.loads(line))
        return rows

    def read_passages(self, required: bool = False) -> list[PassageRecord]:
        return [PassageRecord.from_row(r) for r in self.read_rows(PASSAGES, required)]

    def write_passages(self, records: Iterable[PassageRecord]) -> Path:
        return self.write_rows(
            PASSAGES,
            (r.to_row() for r in records),
            sort_key=lambda row: (
                row["mode"],
                row["backend_id"] or "",
                row["concept_id"],
                row["core_idea_id"],
                row["outcome_id"],
                row["topic"],
                row["repetition"],
                row["passage_id"],
            ),
        )

    # --- manifest ----------------------------------------------------------

    def load_manifest(self) -> dict[str, Any]:
        path = self.path(MANIFEST)
        if not path.exists():
            return {
                "run_id": self.run_id,
                "seed": None,
                "config": {},
                "stages": [],
                "outputs": {},
            }
        return json.loads(path.read_text(encoding="utf-8"))

    def save_manifest(self, manifest: Mapping[str, Any]) -> None:
        self.path(MANIFEST).write_text(
            json.dumps(manifest, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )

    def record_stage(self, op: str, params: Mapping[str, Any]) -> None:
        """Log a stage invocation and refresh output digests."""
        manifest = self.load_manifest()
        stages = [s for s in manifest.get("stages", []) if s["op"] != op]
        stages.append({"op": op, "params": dict(params)})
        manifest["stages"] = stages
        manifest["outputs"] = self.output_digests()
        self.save_manifest(manifest)

    def update_manifest(self, **fields: Any) -> None:
        manifest = self.load_manifest()
        manifest.update(fields)
        manifest["outputs"] = self.output_digests()
        self.save_manifest(manifest)

    def output_digests(self) -> dict[str, str]:
        digests = {}
        for path in sorted(self.root.rglob("*")):
            if path.is_file() and path.name != MANIFEST:
                digests[str(path.relative_to(self.root))] = file_digest(path)
        return digests
