"""Benchmark file ingestion, sampling, and the subject-mention filter."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable, Iterator

from loke.errors import DatasetError
from loke.model import RawTriple, normalize

SOURCES = ("tekgen", "carb", "other")


@dataclass(frozen=True)
class BenchmarkRecord:
    """A sentence with its gold triples."""

    sentence: str
    gold_triples: tuple[RawTriple, ...]
    source: str = "other"

    def __post_init__(self) -> None:
        if not self.sentence.strip():
            raise DatasetError("benchmark sentence must be non-empty")
        if self.source not in SOURCES:
            raise DatasetError(f"unknown source {self.source!r}")
        if not self.gold_triples and self.source != "other":
            raise DatasetError(
                f"{self.source} records must carry at least one gold triple"
            )
        object.__setattr__(self, "gold_triples", tuple(self.gold_triples))


def load_tekgen(path: str) -> Iterator[BenchmarkRecord]:
    """Read JSON-lines records: {"sentence": ..., "triples": [[s,p,o], ...]}.

    Triple rows use human-readable labels, not identifiers.
    """
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except ValueError as exc:
                raise DatasetError(f"bad JSON at {path}:{line_no}: {exc}") from exc
            if not isinstance(data, dict) or "sentence" not in data:
                raise DatasetError(f'missing "sentence" key at {path}:{line_no}')
            if "triples" not in data:
                raise DatasetError(f'missing "triples" key at {path}:{line_no}')
            try:
                triples = tuple(RawTriple.from_list(row) for row in data["triples"])
                yield BenchmarkRecord(data["sentence"], triples, source="tekgen")
            except (ValueError, TypeError, DatasetError) as exc:
                raise DatasetError(f"bad record at {path}:{line_no}: {exc}") from exc


def save_tekgen(records: Iterable[BenchmarkRecord], path: str) -> None:
    """Write records in the JSON-lines benchmark format."""
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            row = {
                "sentence": record.sentence,
                "triples": [triple.to_list() for triple in record.gold_triples],
            }
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")


def load_carb_gold(path: str) -> Iterator[BenchmarkRecord]:
    """Read tab-separated gold lines: sentence, relation, arg1, arg2.

    Consecutive lines sharing a sentence aggregate into one record;
    columns past the fourth are ignored.
    """

    def flush(sentence: str, triples: list[RawTriple]) -> BenchmarkRecord:
        return BenchmarkRecord(sentence, tuple(triples), source="carb")

    current_sentence: str | None = None
    current_triples: list[RawTriple] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) < 4:
                raise DatasetError(
                    f"expected at least 4 tab-separated fields at {path}:{line_no}, "
                    f"got {len(fields)}"
                )
            sentence, relation, arg1, arg2 = fields[:4]
            try:
                triple = RawTriple(arg1, relation, arg2)
            except ValueError as exc:
                raise DatasetError(f"bad triple at {path}:{line_no}: {exc}") from exc
            if sentence != current_sentence:
                if current_sentence is not None:
                    yield flush(current_sentence, current_triples)
                current_sentence, current_triples = sentence, []
            current_triples.append(triple)
    if current_sentence is not None:
        yield flush(current_sentence, current_triples)


def mentions_all_subjects(record: BenchmarkRecord) -> bool:
    """True when every gold subject occurs in the sentence (normalized)."""
    sentence = normalize(record.sentence)
    return all(
        normalize(triple.subject) in sentence for triple in record.gold_triples
    )


def sample_and_filter(
    records: Iterable[BenchmarkRecord], n: int, seed: int
) -> list[BenchmarkRecord]:
    """Sample n records without replacement, then apply the mention filter.

    Sampling uses its own generator seeded with ``seed``, so the output
    is deterministic. When fewer than n records exist, all are taken in
    input order.
    """
    if n < 1:
        raise ValueError("sample size must be >= 1")
    population = list(records)
    if n >= len(population):
        sampled = population
    else:
        sampled = random.Random(seed).sample(population, n)
    return [record for record in sampled if mentions_all_subjects(record)]
