"""N-Triples serialization of linked statements.

Emission follows standard RDF graph rules: subjects and objects are
resources (or literals for objects), and every predicate position must
be an identified resource, so unlinked predicates are minted
deterministic local IRIs rather than left bare. Output is sorted and
deduplicated, giving set semantics under graph union.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable
from urllib.parse import quote

from loke.model import LinkCandidate, LinkedStatement, normalize

XSD = "http://www.w3.org/2001/XMLSchema#"

_DATATYPES = {
    "year": XSD + "gYear",
    "date": XSD + "date",
    "number": XSD + "decimal",
    "quantity": XSD + "decimal",
}

_ABSOLUTE_IRI = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:")

_LITERAL_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
}


@dataclass(frozen=True)
class EmitPolicy:
    """IRI bases and the confidence floor for emission."""

    entity_base: str = "http://www.wikidata.org/entity/"
    property_base: str = "http://www.wikidata.org/prop/direct/"
    local_base: str = "http://example.org/loke/"
    min_confidence: float = 0.0

    def __post_init__(self) -> None:
        for name in ("entity_base", "property_base", "local_base"):
            value = getattr(self, name)
            if not _ABSOLUTE_IRI.match(value):
                raise ValueError(f"{name} must be an absolute IRI, got {value!r}")


def map_datatype(tag: str) -> str:
    """Datatype IRI for a literal type tag; unknown tags map to xsd:string."""
    return _DATATYPES.get(tag.strip().casefold(), XSD + "string")


def _escape_literal(value: str) -> str:
    return "".join(_LITERAL_ESCAPES.get(ch, ch) for ch in value)


def _local_iri(base: str, label: str) -> str:
    return base + quote(normalize(label), safe="")


def _resource(link: LinkCandidate | None, linked_base: str, policy: EmitPolicy, label: str) -> str:
    if link is not None:
        return f"<{linked_base}{link.id}>"
    return f"<{_local_iri(policy.local_base, label)}>"


def emit(statements: Iterable[LinkedStatement], policy: EmitPolicy = EmitPolicy()) -> str:
    """Serialize statements to N-Triples text, sorted and deduplicated.

    Linked slots become base+id IRIs; unlinked terms mint local IRIs
    from their percent-encoded normalized labels. Literal objects keep
    their surface form verbatim, annotated with the mapped datatype.
    """
    lines = set()
    for stmt in statements:
        confidence = stmt.statement_confidence
        if (confidence if confidence is not None else 0.0) < policy.min_confidence:
            continue
        subject = _resource(stmt.subject_link, policy.entity_base, policy, stmt.raw.subject)
        predicate = _resource(
            stmt.predicate_link, policy.property_base, policy, stmt.raw.predicate
        )
        if stmt.raw.literal_type is not None:
            datatype = map_datatype(stmt.raw.literal_type)
            obj = f'"{_escape_literal(stmt.raw.object)}"^^<{datatype}>'
        else:
            obj = _resource(stmt.object_link, policy.entity_base, policy, stmt.raw.object)
        lines.add(f"{subject} {predicate} {obj} .")
    return "".join(line + "\n" for line in sorted(lines))
