"""Hierarchical curriculum catalog: model, ingest, validate, enumerate.

A catalog is a tree of domains, science concepts, core ideas and
grade-tagged learning outcomes, loaded from a single JSON document (the
schema ships in schemas/catalog.schema.json).  Catalogs are immutable
after load and safe to share across threads.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Mapping

from .errors import CatalogSchemaError, DanglingReferenceError, GradeRangeError

GRADE_RANGE = range(1, 6)

# Expected shape for NGSS-derived catalogs; other standards load without comment.
NGSS_EXPECTED_COUNTS = (29, 79)


@dataclass(frozen=True)
class Domain:
    code: str
    name: str


@dataclass(frozen=True)
class ScienceConcept:
    id: str
    domain_code: str
    name: str


@dataclass(frozen=True)
class CoreIdea:
    id: str
    concept_id: str
    text: str


@dataclass(frozen=True)
class LearningOutcome:
    id: str
    core_idea_id: str
    text: str
    grade: int


@dataclass(frozen=True)
class CurriculumItem:
    """One {concept, core idea, learning outcome} tuple, the generation unit."""

    concept: ScienceConcept
    core_idea: CoreIdea
    outcome: LearningOutcome
    grade: int

    def __post_init__(self) -> None:
        if self.grade != self.outcome.grade:
            raise GradeRangeError(
                f"item grade {self.grade} does not match outcome {self.outcome.id} "
                f"grade {self.outcome.grade}",
                grade=self.grade,
            )
        if self.core_idea.concept_id != self.concept.id:
            raise DanglingReferenceError(
                f"core idea {self.core_idea.id} does not belong to concept",
                missing_id=self.concept.id,
            )

    @classmethod
    def assemble(
        cls, concept: ScienceConcept, core_idea: CoreIdea, outcome: LearningOutcome
    ) -> "CurriculumItem":
        return cls(concept=concept, core_idea=core_idea, outcome=outcome, grade=outcome.grade)


@dataclass(frozen=True)
class CurriculumCatalog:
    standard_name: str
    domains: tuple[Domain, ...]
    concepts: tuple[ScienceConcept, ...]
    core_ideas: tuple[CoreIdea, ...]
    outcomes: tuple[LearningOutcome, ...]

    @cached_property
    def _concepts_by_id(self) -> dict[str, ScienceConcept]:
        return {c.id: c for c in self.concepts}

    @cached_property
    def _core_ideas_by_id(self) -> dict[str, CoreIdea]:
        return {c.id: c for c in self.core_ideas}

    @cached_property
    def _outcomes_by_id(self) -> dict[str, LearningOutcome]:
        return {o.id: o for o in self.outcomes}

    def concept(self, concept_id: str) -> ScienceConcept:
        try:
            return self._concepts_by_id[concept_id]
        except KeyError:
            raise DanglingReferenceError("unknown concept id", concept_id) from None

    def core_idea(self, core_idea_id: str) -> CoreIdea:
        try:
            return self._core_ideas_by_id[core_idea_id]
        except KeyError:
            raise DanglingReferenceError("unknown core idea id", core_idea_id) from None

    def outcome(self, outcome_id: str) -> LearningOutcome:
        try:
            return self._outcomes_by_id[outcome_id]
        except KeyError:
            raise DanglingReferenceError("unknown outcome id", outcome_id) from None

    def core_ideas_of(self, concept_id: str) -> tuple[CoreIdea, ...]:
        return tuple(c for c in self.core_ideas if c.concept_id == concept_id)

    def outcomes_of(self, core_idea_id: str) -> tuple[LearningOutcome, ...]:
        return tuple(o for o in self.outcomes if o.core_idea_id == core_idea_id)

    def counts(self) -> tuple[int, int]:
        """(concept count, core idea count)."""
        return (len(self.concepts), len(self.core_ideas))

    def item_for_outcome(self, outcome_id: str) -> CurriculumItem:
        outcome = self.outcome(outcome_id)
        core_idea = self.core_idea(outcome.core_idea_id)
        concept = self.concept(core_idea.concept_id)
        return CurriculumItem.assemble(concept, core_idea, outcome)

    def to_dict(self) -> dict[str, Any]:
        """Nested dict in the catalog file schema; round-trips through load."""
        return {
            "standard": self.standard_name,
            "domains": [{"code": d.code, "name": d.name} for d in self.domains],
            "concepts": [
                {
                    "id": c.id,
                    "domain": c.domain_code,
                    "name": c.name,
                    "core_ideas": [
                        {
                            "id": ci.id,
                            "text": ci.text,
                            "outcomes": [
                                {"id": o.id, "text": o.text, "grade": o.grade}
                                for o in self.outcomes_of(ci.id)
                            ],
                        }
                        for ci in self.core_ideas_of(c.id)
                    ],
                }
                for c in self.concepts
            ],
        }


def _expect(mapping: Any, key: str, kind: type, where: str) -> Any:
    if not isinstance(mapping, dict):
        raise CatalogSchemaError(f"expected an object at {where}", field=where)
    if key not in mapping:
        raise CatalogSchemaError(f"missing required field at {where}", field=f"{where}.{key}")
    value = mapping[key]
    if kind is int and isinstance(value, bool):
        raise CatalogSchemaError(f"expected an integer at {where}.{key}", field=f"{where}.{key}")
    if not isinstance(value, kind):
        raise CatalogSchemaError(
            f"expected {kind.__name__} at {where}.{key}, got {type(value).__name__}",
            field=f"{where}.{key}",
        )
    return value


def load_catalog_data(data: Mapping[str, Any]) -> CurriculumCatalog:
    """Build and validate a catalog from parsed JSON data."""
    standard = _expect(data, "standard", str, "$")
    domains = []
    for i, entry in enumerate(_expect(data, "domains", list, "$")):
        where = f"$.domains[{i}]"
        code = _expect(entry, "code", str, where)
        if not code:
            raise CatalogSchemaError("domain code must be nonempty", field=f"{where}.code")
        domains.append(Domain(code=code, name=_expect(entry, "name", str, where)))
    if len({d.code for d in domains}) != len(domains):
        raise CatalogSchemaError("duplicate domain code", field="$.domains")
    domain_codes = {d.code for d in domains}

    concepts: list[ScienceConcept] = []
    core_ideas: list[CoreIdea] = []
    outcomes: list[LearningOutcome] = []
    seen_ids: set[str] = set()

    def claim(identifier: str, where: str) -> str:
        if not identifier:
            raise CatalogSchemaError("identifier must be nonempty", field=where)
        if identifier in seen_ids:
            raise CatalogSchemaError(f"duplicate identifier {identifier!r}", field=where)
        seen_ids.add(identifier)
        return identifier

    for i, centry in enumerate(_expect(data, "concepts", list, "$")):
        cwhere = f"$.concepts[{i}]"
        concept_id = claim(_expect(centry, "id", str, cwhere), f"{cwhere}.id")
        domain = _expect(centry, "domain", str, cwhere)
        if domain not in domain_codes:
            raise DanglingReferenceError(
                f"concept {concept_id} references unknown domain", domain
            )
        concepts.append(
            ScienceConcept(id=concept_id, domain_code=domain, name=_expect(centry, "name", str, cwhere))
        )
        for j, ientry in enumerate(_expect(centry, "core_ideas", list, cwhere)):
            iwhere = f"{cwhere}.core_ideas[{j}]"
            idea_id = claim(_expect(ientry, "id", str, iwhere), f"{iwhere}.id")
            text = _expect(ientry, "text", str, iwhere)
            if not text:
                raise CatalogSchemaError("core idea text must be nonempty", field=f"{iwhere}.text")
            core_ideas.append(CoreIdea(id=idea_id, concept_id=concept_id, text=text))
            for k, oentry in enumerate(_expect(ientry, "outcomes", list, iwhere)):
                owhere = f"{iwhere}.outcomes[{k}]"
                outcome_id = claim(_expect(oentry, "id", str, owhere), f"{owhere}.id")
                otext = _expect(oentry, "text", str, owhere)
                if not otext:
                    raise CatalogSchemaError(
                        "outcome text must be nonempty", field=f"{owhere}.text"
                    )
                grade = _expect(oentry, "grade", int, owhere)
                if grade not in GRADE_RANGE:
                    raise GradeRangeError(
                        f"outcome {outcome_id} has grade {grade}, expected 1-5", grade=grade
                    )
                outcomes.append(
                    LearningOutcome(id=outcome_id, core_idea_id=idea_id, text=otext, grade=grade)
                )

    catalog = CurriculumCatalog(
        standard_name=standard,
        domains=tuple(domains),
        concepts=tuple(concepts),
        core_ideas=tuple(core_ideas),
        outcomes=tuple(outcomes),
    )
    if "NGSS" in standard.upper() and catalog.counts() != NGSS_EXPECTED_COUNTS:
        warnings.warn(
            f"catalog {standard!r} has counts {catalog.counts()}, expected "
            f"{NGSS_EXPECTED_COUNTS} for an NGSS decomposition",
            stacklevel=2,
        )
    return catalog


def load_catalog(path: str | Path) -> CurriculumCatalog:
    """Load a catalog file; raises DataError subclasses on any violation."""
    raw = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CatalogSchemaError(f"catalog is not valid JSON: {exc}", field="$") from exc
    return load_catalog_data(data)


def save_catalog(catalog: CurriculumCatalog, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(catalog.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def enumerate_items(catalog: CurriculumCatalog) -> list[CurriculumItem]:
    """One item per learning outcome, ordered by (concept, core idea, outcome) id."""
    items = [catalog.item_for_outcome(o.id) for o in catalog.outcomes]
    items.sort(key=lambda it: (it.concept.id, it.core_idea.id, it.outcome.id))
    return items


def type_label(index: int) -> str:
    """0 -> A, 25 -> Z, 26 -> AA, ... stable spreadsheet-style labels."""
    label = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, 26)
        label = chr(ord("A") + rem) + label
    return label


def items_for_concept(
    catalog: CurriculumCatalog, concept_id: str
) -> list[tuple[str, CurriculumItem]]:
    """Labeled candidate set for categorization: [(A, item), (B, item), ...]."""
    catalog.concept(concept_id)
    items = [it for it in enumerate_items(catalog) if it.concept.id == concept_id]
    return [(type_label(i), item) for i, item in enumerate(items)]
