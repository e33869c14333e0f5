"""Lenient tuple scoring, threshold-swept PR curves, and linkability.

Tuple matching is the most lenient reading of CaRB-style scoring: a
predicted tuple and a gold tuple are compared as token multisets with
slot boundaries ignored. Per-sentence precision credits every
prediction with its best gold (many predictions may share one gold);
recall is a one-to-one assignment of golds to predictions. Corpus
numbers are micro-averages, swept over the distinct statement
confidence values as thresholds.

Scoring arithmetic runs on exact fractions end to end and converts to
float only at the reporting boundary, so results are reproducible and
oracle-checkable to the bit.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from loke.errors import EvaluationError
from loke.kb import LabelIndex
from loke.linker import ConfidenceParams, link_term
from loke.model import LinkedStatement, RawTriple, tokenize

EXACT_ASSIGNMENT_LIMIT = 64  # max |preds| * |golds| for the exact matcher


@dataclass(frozen=True)
class PairScore:
    """Lenient overlap of one predicted tuple with one gold tuple."""

    pair_precision: float
    pair_recall: float


def _token_bag(triple: RawTriple) -> Counter:
    bag = Counter(tokenize(triple.subject))
    bag.update(tokenize(triple.predicate))
    bag.update(tokenize(triple.object))
    return bag


def _pair_fractions(
    pred_bag: Counter, gold_bag: Counter
) -> tuple[Fraction, Fraction]:
    shared = sum((pred_bag & gold_bag).values())
    pred_size = sum(pred_bag.values())
    gold_size = sum(gold_bag.values())
    precision = Fraction(shared, pred_size) if pred_size else Fraction(0)
    recall = Fraction(shared, gold_size) if gold_size else Fraction(0)
    return precision, recall


def tuple_match(pred: RawTriple, gold: RawTriple) -> PairScore:
    """Token-multiset overlap ignoring slot boundaries.

    Precision is the shared fraction of the prediction's tokens, recall
    the shared fraction of the gold's tokens.
    """
    precision, recall = _pair_fractions(_token_bag(pred), _token_bag(gold))
    return PairScore(float(precision), float(recall))


def _exact_assignment(weights: list[list[Fraction]]) -> Fraction:
    """Max-weight one-to-one assignment; DP over subsets of the smaller side."""
    if not weights or not weights[0]:
        return Fraction(0)
    if len(weights[0]) > len(weights):
        weights = [list(col) for col in zip(*weights)]
    width = len(weights[0])
    best = {0: Fraction(0)}
    for row in weights:
        extended = dict(best)
        for mask, value in best.items():
            for j in range(width):
                bit = 1 << j
                if mask & bit:
                    continue
                candidate = value + row[j]
                key = mask | bit
                if candidate > extended.get(key, Fraction(-1)):
                    extended[key] = candidate
        best = extended
    return max(best.values())


def _greedy_assignment(
    recalls: list[list[Fraction]], precisions: list[list[Fraction]]
) -> Fraction:
    """Greedy one-to-one matching by descending pair F1."""
    ranked = []
    for i, row in enumerate(recalls):
        for j, recall in enumerate(row):
            precision = precisions[i][j]
            f1 = (
                2 * precision * recall / (precision + recall)
                if precision + recall > 0
                else Fraction(0)
            )
            ranked.append((-f1, i, j))
    ranked.sort()
    used_golds: set[int] = set()
    used_preds: set[int] = set()
    total = Fraction(0)
    for neg_f1, i, j in ranked:
        if i in used_golds or j in used_preds:
            continue
        used_golds.add(i)
        used_preds.add(j)
        total += recalls[i][j]
    return total


def _score_sentence_exact(
    preds: Sequence[RawTriple], golds: Sequence[RawTriple]
) -> tuple[Fraction, Fraction]:
    if not preds:
        return Fraction(0), Fraction(0)
    pred_bags = [_token_bag(p) for p in preds]
    gold_bags = [_token_bag(g) for g in golds]

    precision_sum = Fraction(0)
    pair_p: list[list[Fraction]] = [[] for _ in golds]
    pair_r: list[list[Fraction]] = [[] for _ in golds]
    for pred_bag in pred_bags:
        best = Fraction(0)
        for i, gold_bag in enumerate(gold_bags):
            precision, recall = _pair_fractions(pred_bag, gold_bag)
            pair_p[i].append(precision)
            pair_r[i].append(recall)
            if precision > best:
                best = precision
        precision_sum += best

    if not golds:
        return precision_sum, Fraction(0)
    if len(preds) * len(golds) <= EXACT_ASSIGNMENT_LIMIT:
        recall_sum = _exact_assignment(pair_r)
    else:
        recall_sum = _greedy_assignment(pair_r, pair_p)
    return precision_sum, recall_sum


def score_sentence(
    preds: Sequence[RawTriple], golds: Sequence[RawTriple]
) -> tuple[float, float]:
    """Fractional true-positive mass of one sentence's predictions.

    Returns (precision_sum, recall_sum): the precision sum credits each
    prediction with its best gold, the recall sum is the value of the
    best one-to-one assignment of golds to predictions (exact up to 64
    weight pairs, greedy by pair F1 beyond). Unmatched golds add 0.
    """
    precision_sum, recall_sum = _score_sentence_exact(preds, golds)
    return float(precision_sum), float(recall_sum)


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean; 0 when both rates are 0."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class CurvePoint:
    threshold: float
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ScoreReport:
    """Threshold-swept scores: curve, AUC, optimal point, and counts."""

    curve: tuple[CurvePoint, ...]
    auc: float
    optimal: CurvePoint
    predictions: int
    golds: int
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "curve": [
                {
                    "threshold": pt.threshold,
                    "precision": pt.precision,
                    "recall": pt.recall,
                    "f1": pt.f1,
                }
                for pt in self.curve
            ],
            "auc": self.auc,
            "optimal": {
                "threshold": self.optimal.threshold,
                "precision": self.optimal.precision,
                "recall": self.optimal.recall,
                "f1": self.optimal.f1,
            },
            "counts": {"predictions": self.predictions, "golds": self.golds},
            "warnings": list(self.warnings),
        }


def curve_auc(points: Sequence[tuple[float, float]]) -> float:
    """Trapezoidal area of (recall, precision) points.

    The curve is sorted by recall and extended with a recall-0 point at
    the first point's precision, so the area is defined even when the
    sweep starts above recall 0.
    """
    if not points:
        return 0.0
    extended = [(0.0, points[0][1])] + sorted(points, key=lambda pt: pt[0])
    area = 0.0
    for (r0, p0), (r1, p1) in zip(extended, extended[1:]):
        area += (r1 - r0) * (p1 + p0) / 2.0
    return area


def score_corpus(
    items: Sequence[tuple[Sequence[LinkedStatement], Sequence[RawTriple]]],
    use_confidence: bool = True,
) -> ScoreReport:
    """Sweep confidence thresholds over a corpus of scored sentences.

    ``items`` pairs each sentence's predicted statements with its gold
    triples. With ``use_confidence``, thresholds are the distinct
    statement confidences (statements lacking one score as confidence 0
    with a warning); otherwise a single threshold 0 keeps everything.
    """
    warnings: list[str] = []
    total_golds = sum(len(golds) for _, golds in items)
    if total_golds == 0:
        raise EvaluationError("no gold triples: recall is undefined")

    scored_items: list[tuple[list[tuple[float, RawTriple]], Sequence[RawTriple]]] = []
    confidences: set[float] = set()
    total_preds = 0
    for preds, golds in items:
        rows = []
        for stmt in preds:
            total_preds += 1
            confidence = stmt.statement_confidence
            if confidence is None:
                if use_confidence:
                    warnings.append(
                        f"statement {stmt.raw.to_list()!r} has no confidence; "
                        "scored as 0"
                    )
                confidence = 0.0
            confidences.add(confidence)
            rows.append((confidence, stmt.raw))
        scored_items.append((rows, golds))

    if use_confidence:
        thresholds = sorted(confidences, reverse=True) or [0.0]
    else:
        thresholds = [0.0]

    curve = []
    for threshold in thresholds:
        precision_total = Fraction(0)
        recall_total = Fraction(0)
        kept_count = 0
        for rows, golds in scored_items:
            if use_confidence:
                kept = [triple for conf, triple in rows if conf >= threshold]
            else:
                kept = [triple for _, triple in rows]
            kept_count += len(kept)
            precision_sum, recall_sum = _score_sentence_exact(kept, golds)
            precision_total += precision_sum
            recall_total += recall_sum
        precision = float(precision_total / kept_count) if kept_count else 0.0
        recall = float(recall_total / total_golds)
        curve.append(
            CurvePoint(threshold, precision, recall, f1_score(precision, recall))
        )

    auc = curve_auc([(pt.recall, pt.precision) for pt in curve])
    optimal = max(curve, key=lambda pt: pt.f1)
    return ScoreReport(
        curve=tuple(curve),
        auc=auc,
        optimal=optimal,
        predictions=total_preds,
        golds=total_golds,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class LinkabilityReport:
    """Fractions of slots and whole triples resolvable above threshold."""

    s_frac: float
    p_frac: float
    o_frac: float
    t_frac: float
    total: int
    s_count: int
    p_count: int
    o_count: int
    t_count: int
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "s_frac": self.s_frac,
            "p_frac": self.p_frac,
            "o_frac": self.o_frac,
            "t_frac": self.t_frac,
            "counts": {
                "triples": self.total,
                "subjects": self.s_count,
                "predicates": self.p_count,
                "objects": self.o_count,
                "full_triples": self.t_count,
            },
            "warnings": list(self.warnings),
        }


def linkability(
    triples: Iterable[RawTriple],
    entities: LabelIndex,
    properties: LabelIndex,
    params: ConfidenceParams = ConfidenceParams(),
) -> LinkabilityReport:
    """Fraction of subjects, predicates, objects, and whole triples linkable.

    A slot is linkable when its best candidate's confidence reaches the
    ``theta_link`` threshold. Literal objects are data values, never
    linkable, so a literal triple can never be fully linked.
    """

    def linkable(index: LabelIndex, term: str) -> bool:
        candidate = link_term(index, term, params)
        return candidate is not None and candidate.confidence >= params.theta_link

    total = s_count = p_count = o_count = t_count = 0
    for triple in triples:
        total += 1
        s_ok = linkable(entities, triple.subject)
        p_ok = linkable(properties, triple.predicate)
        o_ok = triple.literal_type is None and linkable(entities, triple.object)
        s_count += s_ok
        p_count += p_ok
        o_count += o_ok
        t_count += s_ok and p_ok and o_ok

    warnings = () if total else ("no triples scored; fractions reported as 0",)

    def frac(count: int) -> float:
        return count / total if total else 0.0

    return LinkabilityReport(
        s_frac=frac(s_count),
        p_frac=frac(p_count),
        o_frac=frac(o_count),
        t_frac=frac(t_count),
        total=total,
        s_count=s_count,
        p_count=p_count,
        o_count=o_count,
        t_count=t_count,
        warnings=warnings,
    )


def write_score_report(
    report: ScoreReport, json_path: str, csv_path: str, svg_path: str
) -> None:
    """Write the report as JSON plus curve CSV plus a PR-curve SVG."""
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(report.to_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")
    with open(csv_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["threshold", "precision", "recall"])
        for pt in report.curve:
            writer.writerow([repr(pt.threshold), repr(pt.precision), repr(pt.recall)])
    render_pr_curve(report, svg_path)


def render_pr_curve(report: ScoreReport, svg_path: str) -> None:
    """Static SVG plot of the precision/recall sweep (deterministic bytes)."""
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    points = sorted((pt.recall, pt.precision) for pt in report.curve)
    with plt.rc_context({"svg.hashsalt": "loke"}):
        fig, ax = plt.subplots(figsize=(5.0, 4.0))
        ax.plot(
            [r for r, _ in points],
            [p for _, p in points],
            marker="o",
            linewidth=1.5,
        )
        ax.set_xlabel("Recall")
        ax.set_ylabel("Precision")
        ax.set_xlim(0.0, 1.05)
        ax.set_ylim(0.0, 1.05)
        ax.grid(True, alpha=0.3)
        ax.set_title(f"PR curve (AUC {report.auc:.3f})")
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
        plt.close(fig)


def write_linkability_report(
    report: LinkabilityReport, dataset: str, json_path: str, csv_path: str
) -> None:
    """Write linkability as JSON plus a one-row CSV for cross-dataset plots."""
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(report.to_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")
    with open(csv_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["dataset", "subjects", "predicates", "objects", "triples"])
        writer.writerow(
            [
                dataset,
                repr(report.s_frac),
                repr(report.p_frac),
                repr(report.o_frac),
                repr(report.t_frac),
            ]
        )
