"""Term linking against label indices with edit-distance confidence.

A term is resolved in two stages: token search produces the top-10
candidate pool, then the pool is re-ranked by character edit distance
from the term. Confidence treats each edit as an uncertain success
(probability ``p``), decaying toward full uncertainty ``u``:

    confidence = (1 - u) + u * p**edit_distance

Statement confidence is the joint (product) confidence of the required
slots: subject and predicate for literal statements, all three slots
for entity statements.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from loke.kb import LabelIndex, search
from loke.kernels import levenshtein
from loke.model import LinkCandidate, LinkedStatement, RawTriple, normalize

SEARCH_POOL_SIZE = 10


@dataclass(frozen=True)
class ConfidenceParams:
    """Edit confidence parameters; defaults are the shipped calibration."""

    p: float = 0.999
    u: float = 0.5
    theta_link: float = 0.999

    def __post_init__(self) -> None:
        for name in ("p", "u", "theta_link"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in the open interval (0, 1)")


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance over the normalized forms of two strings."""
    return levenshtein(normalize(a), normalize(b))


def link_confidence(eps: int, params: ConfidenceParams = ConfidenceParams()) -> float:
    """Map an edit distance to a confidence in (1 - u, 1]."""
    if eps < 0:
        raise ValueError("edit distance must be non-negative")
    return (1.0 - params.u) + params.u * params.p**eps


def link_term(
    index: LabelIndex, term: str, params: ConfidenceParams = ConfidenceParams()
) -> LinkCandidate | None:
    """Resolve a term to the closest record in the top-10 search pool.

    Within the pool the match with the smallest edit distance wins;
    ties prefer higher base score, then lower numeric id, then label.
    A hit outside the pool is never chosen. Returns None when search
    comes back empty.
    """
    hits = search(index, term, SEARCH_POOL_SIZE)
    if not hits:
        return None
    query = normalize(term)
    best = best_key = None
    for record_id, label, base_score in hits:
        eps = levenshtein(query, normalize(label))
        key = (eps, -base_score, int(record_id[1:]), label)
        if best_key is None or key < best_key:
            best, best_key = (record_id, label, eps), key
    record_id, label, eps = best
    return LinkCandidate(
        id=record_id,
        matched_label=label,
        preferred_label=index.records[record_id].preferred_label,
        edit_distance=eps,
        confidence=link_confidence(eps, params),
    )


def link_statement(
    raw: RawTriple,
    entities: LabelIndex,
    properties: LabelIndex,
    params: ConfidenceParams = ConfidenceParams(),
) -> LinkedStatement:
    """Link a triple's slots and compute its joint confidence.

    Subjects and objects resolve against the entity index, predicates
    against the property index. Literal objects are never linked and do
    not participate in the joint confidence.
    """
    subject_link = link_term(entities, raw.subject, params)
    predicate_link = link_term(properties, raw.predicate, params)
    object_link = None
    if raw.literal_type is None:
        object_link = link_term(entities, raw.object, params)

    required = [subject_link, predicate_link]
    if raw.literal_type is None:
        required.append(object_link)
    confidence = None
    if all(link is not None for link in required):
        confidence = 1.0
        for link in required:
            confidence *= link.confidence

    return LinkedStatement(
        raw=raw,
        subject_link=subject_link,
        predicate_link=predicate_link,
        object_link=object_link,
        statement_confidence=confidence,
    )


def correct_labels(stmt: LinkedStatement) -> RawTriple:
    """Rewrite each linked slot to its record's preferred label.

    Unlinked slots and literal objects pass through unchanged; the
    literal type tag is preserved.
    """
    subject = stmt.subject_link.preferred_label if stmt.subject_link else stmt.raw.subject
    predicate = (
        stmt.predicate_link.preferred_label if stmt.predicate_link else stmt.raw.predicate
    )
    obj = stmt.object_link.preferred_label if stmt.object_link else stmt.raw.object
    return RawTriple(subject, predicate, obj, stmt.raw.literal_type)


def save_linked(items, path: str) -> None:
    """Write (sentence, LinkedStatement) pairs as JSON-lines."""
    with open(path, "w", encoding="utf-8") as handle:
        for sentence, stmt in items:
            row = {"sentence": sentence, **stmt.to_dict()}
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")


def load_linked(path: str):
    """Yield (sentence, LinkedStatement) pairs from a JSON-lines file."""
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                data = json.loads(line)
                yield data.get("sentence"), LinkedStatement.from_dict(data)
