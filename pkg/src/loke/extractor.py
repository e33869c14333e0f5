"""Prompt rendering, completion backends, and completion parsing.

The extraction pipeline is render -> complete -> parse. Parsing is
deliberately forgiving: live models wrap their JSON in chatter and emit
malformed rows, so bad rows are skipped with warnings instead of
failing the whole (paid) completion.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from importlib import resources

import requests

from loke.errors import ConfigError, TemplateError, TransportError
from loke.model import RawTriple

logger = logging.getLogger(__name__)

PLACEHOLDER = "$prompt"

# decoding defaults: greedy and roomy enough for a full list of lists
DEFAULT_TEMPERATURE = 0.0
DEFAULT_MAX_TOKENS = 1024


@dataclass(frozen=True)
class PromptTemplate:
    """A prompt body containing exactly one ``$prompt`` placeholder."""

    body: str

    def __post_init__(self) -> None:
        count = self.body.count(PLACEHOLDER)
        if count != 1:
            raise TemplateError(
                f"template must contain exactly one {PLACEHOLDER!r} "
                f"placeholder, found {count}"
            )

    @classmethod
    def default(cls) -> "PromptTemplate":
        """The engineered extraction prompt shipped with the package."""
        body = (
            resources.files("loke")
            .joinpath("prompts/default.prompt")
            .read_text(encoding="utf-8")
        )
        return cls(body)

    @classmethod
    def from_file(cls, path: str) -> "PromptTemplate":
        with open(path, encoding="utf-8") as handle:
            return cls(handle.read())


def render_prompt(template: PromptTemplate, sentence: str) -> str:
    """Substitute the sentence into the template's single placeholder."""
    if not sentence:
        raise ValueError("sentence must be non-empty")
    return template.body.replace(PLACEHOLDER, sentence)


def _first_json_array(raw: str) -> list | None:
    """Return the first well-formed JSON array in raw text, if any."""
    decoder = json.JSONDecoder()
    start = raw.find("[")
    while start != -1:
        try:
            value, _ = decoder.raw_decode(raw, start)
        except ValueError:
            pass
        else:
            if isinstance(value, list):
                return value
        start = raw.find("[", start + 1)
    return None


def parse_completion(raw: str | bytes) -> tuple[list[RawTriple], list[str]]:
    """Parse a completion into triples, tolerating surrounding prose.

    Takes the first well-formed JSON array in the text; each inner
    array of 3 strings becomes a plain triple, of 4 strings a literal
    triple with the fourth element as its type tag. Anything else is
    skipped with a warning. Never raises on arbitrary input.
    """
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8", errors="replace")
    rows = _first_json_array(raw)
    if rows is None:
        return [], ["no JSON array found in completion"]

    triples: list[RawTriple] = []
    warnings: list[str] = []
    for position, row in enumerate(rows):
        try:
            triples.append(RawTriple.from_list(row))
        except ValueError as exc:
            warnings.append(f"skipped row {position}: {exc}")
    return triples, warnings


@dataclass(frozen=True)
class ExtractionResult:
    """One sentence's extraction, with the completion kept for audit."""

    sentence: str
    raw_completion: str
    triples: tuple[RawTriple, ...]
    parse_warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "sentence": self.sentence,
            "raw_completion": self.raw_completion,
            "triples": [triple.to_list() for triple in self.triples],
            "parse_warnings": list(self.parse_warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExtractionResult":
        return cls(
            sentence=data["sentence"],
            raw_completion=data["raw_completion"],
            triples=tuple(RawTriple.from_list(row) for row in data["triples"]),
            parse_warnings=tuple(data.get("parse_warnings", ())),
        )


class CompletionBackend:
    """Contract for completion providers: prompt text in, completion out."""

    #: identifies the model for caching; replay backends use "replay"
    model_id: str = "unknown"

    def complete(self, prompt: str) -> str:
        raise NotImplementedError


class ReplayBackend(CompletionBackend):
    """Fixture-driven backend for deterministic offline runs.

    The fixture file is JSON-lines, one object per line:
    ``{"sentence": ..., "completion": ...}``. A prompt is answered by
    the fixture whose sentence appears in it (longest match wins).
    """

    model_id = "replay"

    def __init__(self, fixtures: dict[str, str]):
        self._fixtures = dict(fixtures)

    @classmethod
    def from_file(cls, path: str) -> "ReplayBackend":
        fixtures = {}
        with open(path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    fixtures[record["sentence"]] = record["completion"]
                except (ValueError, TypeError, KeyError) as exc:
                    raise TransportError(
                        f"bad replay fixture at {path}:{line_no}: {exc}"
                    ) from exc
        return cls(fixtures)

    def complete(self, prompt: str) -> str:
        matches = [s for s in self._fixtures if s and s in prompt]
        if not matches:
            raise TransportError("no replay fixture matches the prompt")
        return self._fixtures[max(matches, key=len)]


class RateLimiter:
    """Token bucket: at most ``per_minute`` request starts per minute.

    Thread-safe; `acquire` blocks until a start slot is available. The
    clock and sleeper are injectable for tests.
    """

    def __init__(self, per_minute: float, clock=time.monotonic, sleep=time.sleep):
        if per_minute <= 0:
            raise ValueError("rate limit must be positive")
        self._interval = 60.0 / per_minute
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next_start = None

    def acquire(self) -> None:
        with self._lock:
            now = self._clock()
            if self._next_start is None or self._next_start < now:
                self._next_start = now
            wait = self._next_start - now
            self._next_start += self._interval
        if wait > 0:
            logger.debug("rate limit: backing off %.2fs", wait)
            self._sleep(wait)


class HTTPBackend(CompletionBackend):
    """Live completions-style HTTP backend.

    POSTs ``{"model", "prompt", "temperature", "max_tokens"}`` to the
    endpoint with a bearer credential read from the environment, and
    returns ``choices[0].text``. Retries transient failures (connection
    errors, 5xx, 429) with exponential backoff, honoring Retry-After.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        credential_env: str,
        timeout: float = 60.0,
        max_retries: int = 3,
        rate_limit_per_minute: float = 60.0,
        temperature: float = DEFAULT_TEMPERATURE,
        max_tokens: int = DEFAULT_MAX_TOKENS,
        session=None,
        sleep=time.sleep,
    ):
        credential = os.environ.get(credential_env)
        if not credential:
            raise ConfigError(
                f"credential environment variable {credential_env!r} is not set; "
                f"export it before running live extraction"
            )
        self.endpoint = endpoint
        self.model_id = model
        self.timeout = timeout
        self.max_retries = max_retries
        self.temperature = temperature
        self.max_tokens = max_tokens
        self._credential = credential
        self._session = session if session is not None else requests.Session()
        self._sleep = sleep
        self._limiter = RateLimiter(rate_limit_per_minute, sleep=sleep)

    def complete(self, prompt: str) -> str:
        payload = {
            "model": self.model_id,
            "prompt": prompt,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }
        headers = {"Authorization": f"Bearer {self._credential}"}
        last_error = "no attempts made"
        for attempt in range(self.max_retries + 1):
            if attempt:
                self._sleep(min(2.0 ** (attempt - 1), 30.0))
            self._limiter.acquire()
            try:
                response = self._session.post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = f"request failed: {exc}"
                logger.warning("completion attempt %d failed: %s", attempt + 1, exc)
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_error = f"HTTP {response.status_code}"
                retry_after = response.headers.get("Retry-After")
                if retry_after is not None:
                    try:
                        self._sleep(float(retry_after))
                    except ValueError:
                        pass
                continue
            if response.status_code != 200:
                raise TransportError(
                    f"completion endpoint returned HTTP {response.status_code}"
                )
            try:
                return response.json()["choices"][0]["text"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportError(
                    f"malformed completion response: {exc}"
                ) from exc
        raise TransportError(
            f"completion failed after {self.max_retries + 1} attempts: {last_error}"
        )


def extract(
    backend: CompletionBackend, template: PromptTemplate, sentence: str
) -> ExtractionResult:
    """Run one sentence through render -> complete -> parse."""
    prompt = render_prompt(template, sentence)
    try:
        completion = backend.complete(prompt)
    except TransportError as exc:
        raise TransportError(f"backend failed for sentence {sentence!r}: {exc}") from exc
    triples, warnings = parse_completion(completion)
    return ExtractionResult(
        sentence=sentence,
        raw_completion=completion,
        triples=tuple(triples),
        parse_warnings=tuple(warnings),
    )


def save_extractions(results, path: str) -> None:
    """Write extraction results as JSON-lines, one result per line."""
    with open(path, "w", encoding="utf-8") as handle:
        for result in results:
            handle.write(json.dumps(result.to_dict(), ensure_ascii=False) + "\n")


def load_extractions(path: str):
    """Yield extraction results from a JSON-lines file."""
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                yield ExtractionResult.from_dict(json.loads(line))
