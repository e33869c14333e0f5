"""Full-text label index over knowledge-base entity/property dumps.

"Full text" here means an inverted index from tokens to (record id,
label) pairs covering every preferred label and alias. Search is
partial matching: any candidate sharing at least one token with the
query is a hit, ranked by how many distinct tokens it shares.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from typing import Iterable, Union

from loke.errors import CorruptIndexError, DatasetError, IndexBuildError, IndexVersionError
from loke.model import EntityRecord, PropertyRecord, tokenize

Record = Union[EntityRecord, PropertyRecord]

MAGIC = b"LOKE"
FORMAT_VERSION = 1
_CHECKSUM_BYTES = 32  # sha256

_KIND_TYPES = {"entity": EntityRecord, "property": PropertyRecord}


@dataclass
class LabelIndex:
    """Write-once inverted index over record labels and aliases."""

    kind: str
    records: dict[str, Record] = field(default_factory=dict)
    postings: dict[str, set[tuple[str, str]]] = field(default_factory=dict)

    def labels_of(self, record_id: str) -> list[str]:
        record = self.records[record_id]
        return [record.preferred_label, *record.aliases]


def build_index(records: Iterable[Record], kind: str) -> LabelIndex:
    """Index a record stream; ids must be unique and match ``kind``."""
    if kind not in _KIND_TYPES:
        raise IndexBuildError(f"unknown index kind {kind!r}")
    expected_type = _KIND_TYPES[kind]
    index = LabelIndex(kind=kind)
    for record in records:
        if not isinstance(record, expected_type):
            raise IndexBuildError(
                f"kind mismatch: {record.id} is not a {kind} record"
            )
        if record.id in index.records:
            raise IndexBuildError(f"duplicate id {record.id}")
        index.records[record.id] = record
        for label in (record.preferred_label, *record.aliases):
            for token in tokenize(label):
                index.postings.setdefault(token, set()).add((record.id, label))
    return index


def search(
    index: LabelIndex, query: str, limit: int = 10
) -> list[tuple[str, str, int]]:
    """Top candidates sharing at least one token with the query.

    Returns (id, matched label, base score) tuples where the base
    score counts shared distinct tokens. Ordering: score descending,
    then shorter label, then id, then label. Aliases are returned with
    the alias as the matched label.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    query_tokens = set(tokenize(query))
    if not query_tokens:
        return []
    scores: dict[tuple[str, str], int] = {}
    for token in query_tokens:
        for hit in index.postings.get(token, ()):
            scores[hit] = scores.get(hit, 0) + 1
    ranked = sorted(
        scores.items(),
        key=lambda item: (-item[1], len(item[0][1]), item[0][0], item[0][1]),
    )
    return [(rid, label, score) for (rid, label), score in ranked[:limit]]


def _record_to_dict(record: Record) -> dict:
    return {
        "id": record.id,
        "label": record.preferred_label,
        "aliases": list(record.aliases),
    }


def _record_from_dict(data: dict, kind: str) -> Record:
    return _KIND_TYPES[kind](
        id=data["id"],
        preferred_label=data["label"],
        aliases=tuple(data.get("aliases", ())),
    )


def save_index(index: LabelIndex, path: str) -> None:
    """Persist to a single binary file: magic, version, payload, checksum."""
    payload = json.dumps(
        {
            "kind": index.kind,
            "records": [
                _record_to_dict(index.records[rid]) for rid in sorted(index.records)
            ],
        },
        ensure_ascii=False,
        sort_keys=True,
    ).encode("utf-8")
    body = MAGIC + struct.pack(">H", FORMAT_VERSION) + payload
    with open(path, "wb") as handle:
        handle.write(body + hashlib.sha256(body).digest())


def load_index(path: str) -> LabelIndex:
    """Load a persisted index; search results match the saved index."""
    with open(path, "rb") as handle:
        blob = handle.read()
    if len(blob) < len(MAGIC) + 2 + _CHECKSUM_BYTES or not blob.startswith(MAGIC):
        raise CorruptIndexError(f"{path} is not an index file (bad magic or truncated)")
    body, checksum = blob[:-_CHECKSUM_BYTES], blob[-_CHECKSUM_BYTES:]
    if hashlib.sha256(body).digest() != checksum:
        raise CorruptIndexError(f"{path} failed checksum verification")
    (version,) = struct.unpack(">H", body[len(MAGIC) : len(MAGIC) + 2])
    if version != FORMAT_VERSION:
        raise IndexVersionError(
            f"{path} uses format version {version}, this build supports "
            f"version {FORMAT_VERSION}"
        )
    data = json.loads(body[len(MAGIC) + 2 :].decode("utf-8"))
    kind = data["kind"]
    records = (_record_from_dict(row, kind) for row in data["records"])
    return build_index(records, kind)


def load_dump(path: str, kind: str) -> Iterable[Record]:
    """Yield records from a JSON-lines dump: {"id", "label", "aliases"}."""
    if kind not in _KIND_TYPES:
        raise DatasetError(f"unknown dump kind {kind!r}")
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield _record_from_dict(json.loads(line), kind)
            except (ValueError, TypeError, KeyError) as exc:
                raise DatasetError(f"malformed record at {path}:{line_no}: {exc}") from exc
