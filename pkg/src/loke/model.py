"""Shared data types and text normalization used across the toolkit."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field


def normalize(text: str) -> str:
    """Normalize text for matching: NFC, case fold, collapse whitespace.

    Total and idempotent; the empty string maps to itself.
    """
    folded = unicodedata.normalize("NFC", text).casefold()
    # casefolding can denormalize, so recompose before splitting
    folded = unicodedata.normalize("NFC", folded)
    return " ".join(folded.split())


def _strip_edge_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end]


def tokenize(text: str) -> list[str]:
    """Split normalized text into tokens.

    Punctuation is stripped from token edges only, so internal hyphens
    and apostrophes survive ("al-Farra" stays one token). Tokens that
    become empty are dropped.
    """
    tokens = []
    for chunk in normalize(text).split():
        token = _strip_edge_punct(chunk)
        if token:
            tokens.append(token)
    return tokens


@dataclass(frozen=True)
class RawTriple:
    """An unlinked extraction: subject, predicate, object strings.

    ``literal_type`` is the optional data-type tag of a literal object
    (e.g. "year", "date"); it is present exactly when the source row
    had four elements.
    """

    subject: str
    predicate: str
    object: str
    literal_type: str | None = None

    def __post_init__(self) -> None:
        for slot in ("subject", "predicate", "object"):
            value = getattr(self, slot)
            if not isinstance(value, str) or not value.strip():
                raise ValueError(f"triple {slot} must be a non-empty string")
            object.__setattr__(self, slot, value.strip())
        if self.literal_type is not None:
            if not isinstance(self.literal_type, str):
                raise ValueError("literal_type must be a string when present")
            object.__setattr__(self, "literal_type", self.literal_type.strip())

    def to_list(self) -> list[str]:
        """JSON form: 3-element array, or 4 when a literal tag is present."""
        row = [self.subject, self.predicate, self.object]
        if self.literal_type is not None:
            row.append(self.literal_type)
        return row

    @classmethod
    def from_list(cls, row: list) -> "RawTriple":
        if not isinstance(row, list) or len(row) not in (3, 4):
            raise ValueError(f"expected a 3- or 4-element array, got {row!r}")
        if not all(isinstance(item, str) for item in row):
            raise ValueError(f"triple array members must be strings: {row!r}")
        literal_type = row[3] if len(row) == 4 else None
        return cls(row[0], row[1], row[2], literal_type)


def _check_id(identifier: str, prefix: str) -> None:
    if (
        not identifier.startswith(prefix)
        or len(identifier) < 2
        or not identifier[1:].isdigit()
    ):
        raise ValueError(
            f"identifier must be {prefix!r} followed by digits, got {identifier!r}"
        )


@dataclass(frozen=True)
class EntityRecord:
    """A knowledge-base entity row: "Q" id, preferred label, aliases."""

    id: str
    preferred_label: str
    aliases: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        _check_id(self.id, "Q")
        if not self.preferred_label:
            raise ValueError("preferred_label must be non-empty")
        object.__setattr__(self, "aliases", tuple(self.aliases))


@dataclass(frozen=True)
class PropertyRecord:
    """A knowledge-base property row: "P" id, preferred label, aliases."""

    id: str
    preferred_label: str
    aliases: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        _check_id(self.id, "P")
        if not self.preferred_label:
            raise ValueError("preferred_label must be non-empty")
        object.__setattr__(self, "aliases", tuple(self.aliases))


@dataclass(frozen=True)
class LinkCandidate:
    """A knowledge-base hit for one extracted term."""

    id: str
    matched_label: str
    preferred_label: str
    edit_distance: int
    confidence: float

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "matched_label": self.matched_label,
            "preferred_label": self.preferred_label,
            "edit_distance": self.edit_distance,
            "confidence": self.confidence,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LinkCandidate":
        return cls(
            id=data["id"],
            matched_label=data["matched_label"],
            preferred_label=data["preferred_label"],
            edit_distance=int(data["edit_distance"]),
            confidence=float(data["confidence"]),
        )


@dataclass(frozen=True)
class LinkedStatement:
    """A raw triple plus per-slot link candidates and joint confidence.

    ``object_link`` is always absent for literal statements, and
    ``statement_confidence`` is present exactly when every required
    slot linked (subject+predicate for literals, all three otherwise).
    """

    raw: RawTriple
    subject_link: LinkCandidate | None = None
    predicate_link: LinkCandidate | None = None
    object_link: LinkCandidate | None = None
    statement_confidence: float | None = None

    def __post_init__(self) -> None:
        if self.raw.literal_type is not None and self.object_link is not None:
            raise ValueError("literal statements cannot carry an object link")

    def to_dict(self) -> dict:
        return {
            "raw": self.raw.to_list(),
            "subject_link": self.subject_link.to_dict() if self.subject_link else None,
            "predicate_link": (
                self.predicate_link.to_dict() if self.predicate_link else None
            ),
            "object_link": self.object_link.to_dict() if self.object_link else None,
            "statement_confidence": self.statement_confidence,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LinkedStatement":
        def load(key: str) -> LinkCandidate | None:
            value = data.get(key)
            return LinkCandidate.from_dict(value) if value else None

        confidence = data.get("statement_confidence")
        return cls(
            raw=RawTriple.from_list(data["raw"]),
            subject_link=load("subject_link"),
            predicate_link=load("predicate_link"),
            object_link=load("object_link"),
            statement_confidence=None if confidence is None else float(confidence),
        )
