from __future__ import annotations

import json

import pytest

from passagelab.curriculum import (
    enumerate_items,
    items_for_concept,
    load_catalog,
    load_catalog_data,
    save_catalog,
    type_label,
)
from passagelab.errors import CatalogSchemaError, DanglingReferenceError, GradeRangeError

from conftest import make_wide_catalog, small_catalog_data


class TestLoadCatalog:
    def test_counts_for_protocol_scale_catalog(self):
        catalog = load_catalog_data(make_wide_catalog())
        assert catalog.counts() == (29, 79)
        assert len(catalog.outcomes) == 79

    def test_empty_catalog_is_valid(self):
        catalog = load_catalog_data(
            {"standard": "EMPTY", "domains": [], "concepts": []}
        )
        assert catalog.counts() == (0, 0)

    def test_grade_zero_names_outcome(self):
        data = small_catalog_data()
        data["concepts"][0]["core_ideas"][0]["outcomes"][0]["grade"] = 0
        with pytest.raises(GradeRangeError, match="1-LS1-1"):
            load_catalog_data(data)

    def test_grade_six_rejected(self):
        data = small_catalog_data()
        data["concepts"][0]["core_ideas"][0]["outcomes"][0]["grade"] = 6
        with pytest.raises(GradeRangeError):
            load_catalog_data(data)

    def test_missing_field_names_it(self):
        data = small_catalog_data()
        del data["concepts"][0]["name"]
        with pytest.raises(CatalogSchemaError) as err:
            load_catalog_data(data)
        assert "name" in str(err.value)

    def test_duplicate_identifier_rejected(self):
        data = small_catalog_data()
        data["concepts"][1]["id"] = "LS1"
        with pytest.raises(CatalogSchemaError, match="duplicate"):
            load_catalog_data(data)

    def test_unknown_domain_named(self):
        data = small_catalog_data()
        data["concepts"][0]["domain"] = "XX"
        with pytest.raises(DanglingReferenceError, match="'XX'"):
            load_catalog_data(data)

    def test_bad_json_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(CatalogSchemaError):
            load_catalog(path)

    def test_ngss_count_warning(self):
        data = small_catalog_data()
        data["standard"] = "NGSS 2013"
        with pytest.warns(UserWarning, match="expected"):
            load_catalog_data(data)

    def test_non_ngss_catalog_loads_without_warning(self, recwarn):
        load_catalog_data(small_catalog_data())
        assert not recwarn.list

    def test_round_trip(self, small_catalog, tmp_path):
        path = tmp_path / "copy.json"
        save_catalog(small_catalog, path)
        assert load_catalog(path) == small_catalog

    def test_round_trip_twice_is_identical_json(self, small_catalog, tmp_path):
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        save_catalog(small_catalog, first)
        save_catalog(load_catalog(first), second)
        assert first.read_text() == second.read_text()


class TestEnumerateItems:
    def test_expansion(self, small_catalog):
        items = enumerate_items(small_catalog)
        assert len(items) == len(small_catalog.outcomes) == 4
        assert [it.grade for it in items] == [1, 4, 1, 2]

    def test_grades_match_outcomes(self, small_catalog):
        for item in enumerate_items(small_catalog):
            assert item.grade == item.outcome.grade

    def test_empty_catalog(self):
        catalog = load_catalog_data({"standard": "E", "domains": [], "concepts": []})
        assert enumerate_items(catalog) == []

    def test_bijection_on_wide_catalog(self):
        catalog = load_catalog_data(make_wide_catalog())
        items = enumerate_items(catalog)
        assert len(items) == len(catalog.outcomes)
        assert len({it.outcome.id for it in items}) == len(items)

    def test_deterministic_order(self, small_catalog):
        ids = [it.outcome.id for it in enumerate_items(small_catalog)]
        assert ids == ["1-LS1-1", "4-LS1-1", "1-LS1-2", "2-PS1-1"]


class TestItemsForConcept:
    def test_labels_in_order(self, small_catalog):
        labeled = items_for_concept(small_catalog, "LS1")
        assert [label for label, _ in labeled] == ["A", "B", "C"]

    def test_single_outcome_concept(self, small_catalog):
        labeled = items_for_concept(small_catalog, "PS1")
        assert [label for label, _ in labeled] == ["A"]

    def test_unknown_concept(self, small_catalog):
        with pytest.raises(DanglingReferenceError, match="NOPE"):
            items_for_concept(small_catalog, "NOPE")

    def test_seven_outcomes_label_a_through_g(self):
        data = small_catalog_data()
        data["concepts"][0]["core_ideas"][0]["outcomes"] = [
            {"id": f"o{i}", "text": f"outcome {i}", "grade": i % 5 + 1} for i in range(7)
        ]
        del data["concepts"][0]["core_ideas"][1]
        catalog = load_catalog_data(data)
        labels = [label for label, _ in items_for_concept(catalog, "LS1")]
        assert labels == ["A", "B", "C", "D", "E", "F", "G"]

    def test_labels_stable_across_calls_and_reloads(self, small_catalog, tmp_path):
        first = items_for_concept(small_catalog, "LS1")
        second = items_for_concept(small_catalog, "LS1")
        assert first == second
        path = tmp_path / "catalog.json"
        path.write_text(json.dumps(small_catalog_data()), encoding="utf-8")
        reloaded = load_catalog(path)
        assert [
            (label, item.outcome.id) for label, item in items_for_concept(reloaded, "LS1")
        ] == [(label, item.outcome.id) for label, item in first]

    def test_labels_extend_past_z(self):
        assert type_label(0) == "A"
        assert type_label(25) == "Z"
        assert type_label(26) == "AA"
        assert type_label(27) == "AB"
