"""Exception hierarchy shared across modules.

The CLI maps these onto exit codes: input-side errors exit 1,
transport failures exit 2.
"""


class LokeError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(LokeError):
    """Run configuration is unusable (missing credential, fixture, or file)."""


class TemplateError(LokeError):
    """Prompt template is missing or duplicates its placeholder."""


class TransportError(LokeError):
    """Completion backend failed after retries, or no fixture matched."""


class DatasetError(LokeError):
    """A benchmark or dump file is malformed; message carries the line number."""


class IndexBuildError(LokeError):
    """Record stream violates index invariants (duplicate id, kind mismatch)."""


class CorruptIndexError(LokeError):
    """Persisted index failed its magic or checksum verification."""


class IndexVersionError(LokeError):
    """Persisted index uses an unsupported format version."""


class EvaluationError(LokeError):
    """Scoring input is degenerate (e.g. empty gold set: recall undefined)."""
