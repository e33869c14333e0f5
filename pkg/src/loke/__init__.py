"""Linked open knowledge extraction toolkit.

Extracts knowledge-graph triples from sentences through an engineered
prompt against a completions-style language-model backend, links the
extracted terms to a Wikidata-like knowledge base with edit-distance
confidence scoring, emits N-Triples, and scores extractions with a
lenient tuple matcher plus linkability metrics.
"""

from loke.errors import (
    CorruptIndexError,
    DatasetError,
    EvaluationError,
    IndexBuildError,
    IndexVersionError,
    LokeError,
    TemplateError,
    TransportError,
)
from loke.model import (
    EntityRecord,
    LinkCandidate,
    LinkedStatement,
    PropertyRecord,
    RawTriple,
    normalize,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "normalize",
    "tokenize",
    "RawTriple",
    "EntityRecord",
    "PropertyRecord",
    "LinkCandidate",
    "LinkedStatement",
    "LokeError",
    "TemplateError",
    "TransportError",
    "DatasetError",
    "IndexBuildError",
    "CorruptIndexError",
    "IndexVersionError",
    "EvaluationError",
]
