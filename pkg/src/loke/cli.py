"""Command-line entry point wiring the pipeline stages together.

Every command writes a manifest next to its outputs (config snapshot,
seed, input checksums) so runs are reproducible; two runs with
identical manifests produce byte-identical outputs. Live completions
are cached by (template, sentence, model) so a repeated sentence is
never paid for twice.

Exit codes: 0 success, 1 input/config error, 2 backend failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
import threading
from concurrent.futures import ThreadPoolExecutor

from loke import __version__, datasets, evaluation, extractor, kb, linker, rdf
from loke.errors import ConfigError, LokeError, TransportError
from loke.model import LinkedStatement, RawTriple, normalize

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors exit 1 instead of 2."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _sha256_file(path: str) -> dict:
    digest = hashlib.sha256()
    size = 0
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
            size += len(chunk)
    return {"sha256": digest.hexdigest(), "bytes": size}


def _write_manifest(
    path: str, command: str, config: dict, inputs: list[str], outputs: list[str]
) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "seed": config.get("seed"),
        "inputs": {p: _sha256_file(p) for p in inputs},
        "outputs": outputs,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _require_file(path: str, what: str) -> str:
    if not os.path.isfile(path):
        raise ConfigError(f"{what} not found: {path}")
    return path


class CompletionCache:
    """Append-only JSON-lines store of completions, keyed by request."""

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._entries: dict[str, str] = {}
        if os.path.exists(path):
            with open(path, encoding="utf-8") as handle:
                for line in handle:
                    if line.strip():
                        row = json.loads(line)
                        self._entries[row["key"]] = row["completion"]

    @staticmethod
    def key(template_body: str, model: str, sentence: str) -> str:
        material = "\x00".join((template_body, model, sentence))
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    def get(self, key: str) -> str | None:
        with self._lock:
            return self._entries.get(key)

    def put(self, key: str, completion: str) -> None:
        with self._lock:
            if key in self._entries:
                return
            self._entries[key] = completion
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(
                    json.dumps({"key": key, "completion": completion}) + "\n"
                )


def _load_sentences(path: str) -> list[str]:
    """Sentences from a JSON-lines file with a "sentence" field per line."""
    sentences = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                sentences.append(data["sentence"])
            except (ValueError, TypeError, KeyError) as exc:
                raise ConfigError(
                    f'no "sentence" field at {path}:{line_no}: {exc}'
                ) from exc
    return sentences


# ---------------------------------------------------------------------------
# commands


def cmd_build_index(args) -> int:
    _require_file(args.dump, "dump file")
    index = kb.build_index(kb.load_dump(args.dump, args.kind), args.kind)
    kb.save_index(index, args.out)
    _write_manifest(
        args.out + ".manifest.json",
        "build-index",
        {"dump": args.dump, "kind": args.kind, "out": args.out},
        [args.dump],
        [args.out],
    )
    print(f"indexed {len(index.records)} {args.kind} records -> {args.out}")
    return 0


def cmd_sample(args) -> int:
    _require_file(args.input, "input file")
    records = list(datasets.load_tekgen(args.input))
    kept = datasets.sample_and_filter(records, args.n, args.seed)
    datasets.save_tekgen(kept, args.out)
    _write_manifest(
        args.out + ".manifest.json",
        "sample",
        {"input": args.input, "n": args.n, "seed": args.seed, "out": args.out},
        [args.input],
        [args.out],
    )
    print(
        f"sampled {min(args.n, len(records))} of {len(records)} records, "
        f"kept {len(kept)} after the subject-mention filter -> {args.out}"
    )
    return 0


def _build_backend(args) -> extractor.CompletionBackend:
    if args.backend == "replay":
        if not args.fixtures:
            raise ConfigError("replay backend requires --fixtures")
        _require_file(args.fixtures, "fixture file")
        return extractor.ReplayBackend.from_file(args.fixtures)
    if not args.endpoint or not args.model:
        raise ConfigError("live backend requires --endpoint and --model")
    return extractor.HTTPBackend(
        endpoint=args.endpoint,
        model=args.model,
        credential_env=args.credential_env,
        timeout=args.timeout,
        max_retries=args.max_retries,
        rate_limit_per_minute=args.rate_limit,
        temperature=args.temperature,
        max_tokens=args.max_tokens,
    )


def cmd_extract(args) -> int:
    _require_file(args.input, "input file")
    sentences = _load_sentences(args.input)
    template = (
        extractor.PromptTemplate.from_file(_require_file(args.template, "template"))
        if args.template
        else extractor.PromptTemplate.default()
    )
    backend = _build_backend(args)
    cache = CompletionCache(args.cache) if args.cache else None

    def run_one(sentence: str) -> extractor.ExtractionResult:
        if cache is not None:
            key = CompletionCache.key(template.body, backend.model_id, sentence)
            completion = cache.get(key)
            if completion is None:
                result = extractor.extract(backend, template, sentence)
                cache.put(key, result.raw_completion)
                return result
            triples, warnings = extractor.parse_completion(completion)
            return extractor.ExtractionResult(
                sentence, completion, tuple(triples), tuple(warnings)
            )
        return extractor.extract(backend, template, sentence)

    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(run_one, sentences))
    else:
        results = [run_one(sentence) for sentence in sentences]

    extractor.save_extractions(results, args.out)
    inputs = [args.input] + ([args.fixtures] if args.fixtures else [])
    config = {
        "backend": args.backend,
        "endpoint": args.endpoint,
        "model": backend.model_id,
        "credential_env": args.credential_env if args.backend == "live" else None,
        "template_sha256": hashlib.sha256(template.body.encode("utf-8")).hexdigest(),
        "temperature": args.temperature,
        "max_tokens": args.max_tokens,
        "timeout": args.timeout,
        "max_retries": args.max_retries,
        "rate_limit": args.rate_limit,
        "workers": args.workers,
        "cache": args.cache,
        "input": args.input,
        "out": args.out,
    }
    _write_manifest(
        args.out + ".manifest.json", "extract", config, inputs, [args.out]
    )
    total = sum(len(result.triples) for result in results)
    print(f"extracted {total} triples from {len(sentences)} sentences -> {args.out}")
    return 0


def cmd_link(args) -> int:
    _require_file(args.extractions, "extractions file")
    entities = kb.load_index(_require_file(args.entities, "entity index"))
    properties = kb.load_index(_require_file(args.properties, "property index"))
    params = linker.ConfidenceParams(p=args.p, u=args.u, theta_link=args.theta)

    rows = []
    for result in extractor.load_extractions(args.extractions):
        for triple in result.triples:
            stmt = linker.link_statement(triple, entities, properties, params)
            rows.append((result.sentence, stmt))
    linker.save_linked(rows, args.out)
    config = {
        "extractions": args.extractions,
        "entities": args.entities,
        "properties": args.properties,
        "p": args.p,
        "u": args.u,
        "theta": args.theta,
        "out": args.out,
    }
    _write_manifest(
        args.out + ".manifest.json",
        "link",
        config,
        [args.extractions, args.entities, args.properties],
        [args.out],
    )
    print(f"linked {len(rows)} statements -> {args.out}")
    return 0


def _load_gold(path: str, fmt: str) -> dict[str, list[RawTriple]]:
    loader = datasets.load_tekgen if fmt == "tekgen" else datasets.load_carb_gold
    golds: dict[str, list[RawTriple]] = {}
    for record in loader(path):
        golds.setdefault(normalize(record.sentence), []).extend(record.gold_triples)
    return golds


def _load_predictions(path: str, fmt: str) -> dict[str, list[LinkedStatement]]:
    """Predictions grouped by normalized sentence, as linked statements."""
    groups: dict[str, list[LinkedStatement]] = {}
    if fmt == "linked":
        for sentence, stmt in linker.load_linked(path):
            groups.setdefault(normalize(sentence or ""), []).append(stmt)
    elif fmt == "extractions":
        for result in extractor.load_extractions(path):
            key = normalize(result.sentence)
            for triple in result.triples:
                groups.setdefault(key, []).append(LinkedStatement(raw=triple))
    else:  # carb-style TSV of external predictions
        for record in datasets.load_carb_gold(path):
            key = normalize(record.sentence)
            for triple in record.gold_triples:
                groups.setdefault(key, []).append(LinkedStatement(raw=triple))
    return groups


def cmd_evaluate(args) -> int:
    _require_file(args.preds, "predictions file")
    _require_file(args.gold, "gold file")
    golds = _load_gold(args.gold, args.gold_format)
    groups = _load_predictions(args.preds, args.preds_format)
    if args.corrected:
        groups = {
            key: [
                dataclasses.replace(stmt, raw=linker.correct_labels(stmt))
                for stmt in stmts
            ]
            for key, stmts in groups.items()
        }

    items = []
    for key, gold_triples in golds.items():
        items.append((groups.pop(key, []), gold_triples))
    for leftover in sorted(groups):
        items.append((groups[leftover], []))

    if args.use_confidence == "auto":
        use_confidence = args.preds_format == "linked"
    else:
        use_confidence = args.use_confidence == "yes"
    report = evaluation.score_corpus(items, use_confidence=use_confidence)

    os.makedirs(args.out_dir, exist_ok=True)
    json_path = os.path.join(args.out_dir, "report.json")
    csv_path = os.path.join(args.out_dir, "curve.csv")
    svg_path = os.path.join(args.out_dir, "pr_curve.svg")
    evaluation.write_score_report(report, json_path, csv_path, svg_path)
    config = {
        "preds": args.preds,
        "preds_format": args.preds_format,
        "gold": args.gold,
        "gold_format": args.gold_format,
        "corrected": args.corrected,
        "use_confidence": use_confidence,
        "out_dir": args.out_dir,
    }
    _write_manifest(
        os.path.join(args.out_dir, "manifest.json"),
        "evaluate",
        config,
        [args.preds, args.gold],
        [json_path, csv_path, svg_path],
    )
    best = report.optimal
    print(
        f"optimal P {best.precision:.3f} R {best.recall:.3f} F1 {best.f1:.3f} "
        f"AUC {report.auc:.3f} ({report.predictions} predictions, "
        f"{report.golds} golds) -> {args.out_dir}"
    )
    return 0


def _load_triples(path: str, fmt: str) -> list[RawTriple]:
    if fmt in ("tekgen", "carb"):
        loader = datasets.load_tekgen if fmt == "tekgen" else datasets.load_carb_gold
        return [t for record in loader(path) for t in record.gold_triples]
    if fmt == "extractions":
        return [t for result in extractor.load_extractions(path) for t in result.triples]
    return [stmt.raw for _, stmt in linker.load_linked(path)]


def cmd_linkability(args) -> int:
    _require_file(args.input, "input file")
    triples = _load_triples(args.input, args.format)
    entities = kb.load_index(_require_file(args.entities, "entity index"))
    properties = kb.load_index(_require_file(args.properties, "property index"))
    params = linker.ConfidenceParams(theta_link=args.theta)
    report = evaluation.linkability(triples, entities, properties, params)

    os.makedirs(args.out_dir, exist_ok=True)
    label = args.dataset_label or os.path.splitext(os.path.basename(args.input))[0]
    json_path = os.path.join(args.out_dir, "linkability.json")
    csv_path = os.path.join(args.out_dir, "linkability.csv")
    evaluation.write_linkability_report(report, label, json_path, csv_path)
    config = {
        "input": args.input,
        "format": args.format,
        "entities": args.entities,
        "properties": args.properties,
        "theta": args.theta,
        "dataset_label": label,
        "out_dir": args.out_dir,
    }
    _write_manifest(
        os.path.join(args.out_dir, "manifest.json"),
        "linkability",
        config,
        [args.input, args.entities, args.properties],
        [json_path, csv_path],
    )
    print(
        f"linkability S {report.s_frac:.3f} P {report.p_frac:.3f} "
        f"O {report.o_frac:.3f} T {report.t_frac:.3f} "
        f"over {report.total} triples -> {args.out_dir}"
    )
    return 0


def cmd_emit_rdf(args) -> int:
    _require_file(args.linked, "linked statements file")
    policy = rdf.EmitPolicy(
        entity_base=args.entity_base,
        property_base=args.property_base,
        local_base=args.local_base,
        min_confidence=args.min_confidence,
    )
    statements = [stmt for _, stmt in linker.load_linked(args.linked)]
    text = rdf.emit(statements, policy)
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(text)
    config = {
        "linked": args.linked,
        "entity_base": args.entity_base,
        "property_base": args.property_base,
        "local_base": args.local_base,
        "min_confidence": args.min_confidence,
        "out": args.out,
    }
    _write_manifest(
        args.out + ".manifest.json", "emit-rdf", config, [args.linked], [args.out]
    )
    print(f"emitted {text.count(chr(10))} triples -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="loke", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"loke {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-index", help="index an entity or property dump")
    p.add_argument("--dump", required=True, help="JSON-lines dump file")
    p.add_argument("--kind", required=True, choices=["entity", "property"])
    p.add_argument("--out", required=True, help="index file to write")
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("sample", help="sample records and filter for subject mentions")
    p.add_argument("--input", required=True, help="benchmark JSON-lines file")
    p.add_argument("--n", type=int, required=True, help="sample size")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("extract", help="extract triples from sentences")
    p.add_argument("--input", required=True, help='JSON-lines with a "sentence" field')
    p.add_argument("--backend", choices=["replay", "live"], default="replay")
    p.add_argument("--fixtures", help="replay fixture JSON-lines file")
    p.add_argument("--endpoint", help="completions endpoint URL (live)")
    p.add_argument("--model", help="model name (live)")
    p.add_argument(
        "--credential-env",
        default="LOKE_API_KEY",
        help="environment variable holding the API credential",
    )
    p.add_argument("--template", help="prompt template file (default: built-in)")
    p.add_argument("--temperature", type=float, default=extractor.DEFAULT_TEMPERATURE)
    p.add_argument("--max-tokens", type=int, default=extractor.DEFAULT_MAX_TOKENS)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--rate-limit", type=float, default=60.0, help="requests per minute")
    p.add_argument("--workers", type=int, default=1, help="concurrent requests")
    p.add_argument("--cache", help="completion cache file (JSON-lines)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("link", help="link extracted triples to the knowledge base")
    p.add_argument("--extractions", required=True)
    p.add_argument("--entities", required=True, help="entity index file")
    p.add_argument("--properties", required=True, help="property index file")
    p.add_argument("--p", type=float, default=0.999, help="per-edit success probability")
    p.add_argument("--u", type=float, default=0.5, help="full-uncertainty floor")
    p.add_argument("--theta", type=float, default=0.999, help="linkability threshold")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("evaluate", help="score predictions against gold triples")
    p.add_argument("--preds", required=True)
    p.add_argument(
        "--preds-format", choices=["linked", "extractions", "carb"], default="linked"
    )
    p.add_argument("--gold", required=True)
    p.add_argument("--gold-format", choices=["tekgen", "carb"], default="tekgen")
    p.add_argument(
        "--use-confidence",
        choices=["auto", "yes", "no"],
        default="auto",
        help="sweep confidence thresholds (auto: only for linked predictions)",
    )
    p.add_argument(
        "--corrected",
        action="store_true",
        help="rewrite linked slots to preferred labels before scoring",
    )
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("linkability", help="fraction of slots linkable to the KB")
    p.add_argument("--input", required=True)
    p.add_argument(
        "--format",
        choices=["tekgen", "carb", "extractions", "linked"],
        default="tekgen",
    )
    p.add_argument("--entities", required=True)
    p.add_argument("--properties", required=True)
    p.add_argument("--theta", type=float, default=0.999)
    p.add_argument("--dataset-label", help="row label in the CSV (default: file stem)")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_linkability)

    p = sub.add_parser("emit-rdf", help="serialize linked statements as N-Triples")
    p.add_argument("--linked", required=True)
    p.add_argument("--entity-base", default=rdf.EmitPolicy.entity_base)
    p.add_argument("--property-base", default=rdf.EmitPolicy.property_base)
    p.add_argument("--local-base", default=rdf.EmitPolicy.local_base)
    p.add_argument("--min-confidence", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit_rdf)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except TransportError as exc:
        print(f"loke: backend error: {exc}", file=sys.stderr)
        return 2
    except (LokeError, OSError, ValueError) as exc:
        print(f"loke: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
