import json

import pytest

from loke.datasets import (
    BenchmarkRecord,
    load_carb_gold,
    load_tekgen,
    mentions_all_subjects,
    sample_and_filter,
    save_tekgen,
)
from loke.errors import DatasetError
from loke.model import RawTriple

from conftest import FIXTURES


class TestBenchmarkRecord:
    def test_tekgen_requires_gold(self):
        with pytest.raises(DatasetError):
            BenchmarkRecord("s", (), "tekgen")

    def test_other_allows_empty_gold(self):
        assert BenchmarkRecord("s", (), "other").gold_triples == ()

    def test_unknown_source(self):
        with pytest.raises(DatasetError):
            BenchmarkRecord("s", (RawTriple("a", "b", "c"),), "imagined")

    def test_empty_sentence(self):
        with pytest.raises(DatasetError):
            BenchmarkRecord("  ", (RawTriple("a", "b", "c"),), "tekgen")


class TestLoadTekgen:
    def test_fixture(self):
        records = list(load_tekgen(str(FIXTURES / "gold.jsonl")))
        assert len(records) == 3
        assert records[1].gold_triples[0].to_list() == [
            "Toxabramis maensis",
            "taxon rank",
            "Species",
        ]

    def test_missing_sentence_key(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"triples": [["a","b","c"]]}\n')
        with pytest.raises(DatasetError, match="bad.jsonl:1"):
            list(load_tekgen(str(path)))

    def test_count_preserved(self, tmp_path):
        path = tmp_path / "big.jsonl"
        with path.open("w") as handle:
            for i in range(1000):
                handle.write(
                    json.dumps({"sentence": f"s{i} here", "triples": [["s", "p", "o"]]})
                    + "\n"
                )
        assert len(list(load_tekgen(str(path)))) == 1000

    def test_save_round_trip(self, tmp_path):
        records = list(load_tekgen(str(FIXTURES / "gold.jsonl")))
        path = tmp_path / "out.jsonl"
        save_tekgen(records, str(path))
        assert list(load_tekgen(str(path))) == records


class TestLoadCarbGold:
    def test_same_sentence_lines_aggregate(self):
        records = list(load_carb_gold(str(FIXTURES / "carb_sample.tsv")))
        assert len(records) == 2
        assert len(records[0].gold_triples) == 2
        assert len(records[1].gold_triples) == 1

    def test_field_order(self, tmp_path):
        path = tmp_path / "one.tsv"
        path.write_text("Alice is Bob's roommate.\tis\tAlice\tBob's roommate\n")
        (record,) = load_carb_gold(str(path))
        assert record.gold_triples[0].to_list() == ["Alice", "is", "Bob's roommate"]

    def test_three_fields_rejected(self, tmp_path):
        path = tmp_path / "short.tsv"
        path.write_text("sentence\trel\targ1\n")
        with pytest.raises(DatasetError, match="short.tsv:1"):
            list(load_carb_gold(str(path)))

    def test_extra_fields_ignored(self, tmp_path):
        path = tmp_path / "extra.tsv"
        path.write_text("s one\tr\ta\tb\t0.93\textra\n")
        (record,) = load_carb_gold(str(path))
        assert record.gold_triples[0].to_list() == ["a", "r", "b"]


class TestMentionFilter:
    def test_subject_in_text(self):
        record = BenchmarkRecord(
            "Tiram is a town and Village Development Committee in Pyuthan.",
            (RawTriple("Tiram", "country", "Nepal"),),
            "tekgen",
        )
        assert mentions_all_subjects(record)

    def test_subject_absent(self):
        record = BenchmarkRecord(
            "The capital is large.",
            (RawTriple("Kathmandu", "country", "Nepal"),),
            "tekgen",
        )
        assert not mentions_all_subjects(record)

    def test_mention_is_case_insensitive(self):
        record = BenchmarkRecord(
            "TIRAM is a town.", (RawTriple("tiram", "type", "town"),), "tekgen"
        )
        assert mentions_all_subjects(record)

    def test_every_subject_must_appear(self):
        record = BenchmarkRecord(
            "Tiram is a town.",
            (RawTriple("Tiram", "type", "town"), RawTriple("Pyuthan", "p", "o")),
            "tekgen",
        )
        assert not mentions_all_subjects(record)


class TestSampleAndFilter:
    def make_records(self, n):
        return [
            BenchmarkRecord(
                f"Item{i} is a thing.", (RawTriple(f"Item{i}", "p", "o"),), "tekgen"
            )
            for i in range(n)
        ]

    def test_deterministic(self):
        records = self.make_records(100)
        assert sample_and_filter(records, 10, 7) == sample_and_filter(records, 10, 7)

    def test_seed_changes_sample(self):
        records = self.make_records(100)
        assert sample_and_filter(records, 10, 7) != sample_and_filter(records, 10, 8)

    def test_small_population_keeps_order(self):
        records = self.make_records(5)
        assert sample_and_filter(records, 50, 0) == records

    def test_filter_applies_after_sampling(self):
        records = self.make_records(3) + [
            BenchmarkRecord("No subject here.", (RawTriple("Ghost", "p", "o"),), "tekgen")
        ]
        kept = sample_and_filter(records, 50, 0)
        assert len(kept) == 3
        assert all(mentions_all_subjects(r) for r in kept)

    def test_bad_n(self):
        with pytest.raises(ValueError):
            sample_and_filter([], 0, 0)
