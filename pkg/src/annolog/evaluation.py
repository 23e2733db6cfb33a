"""Scoring predicted answer types against gold annotations.

Each question gets one verdict: Correct when the gold type is among the
predictions, Supertype when some prediction strictly subsumes the gold
type (the prediction was right but not specific enough), Wrong otherwise,
and NoPrediction when nothing was predicted.  Accuracy is Correct/total
as a percentage with one decimal, round-half-up, computed from exact
integer counts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import AnnologError
from .lexicon import TypeTaxonomy


class Verdict(str, Enum):
    CORRECT = "Correct"
    SUPERTYPE = "Supertype"
    WRONG = "Wrong"
    NO_PREDICTION = "NoPrediction"


class IdMismatchError(AnnologError):
    def __init__(self, missing_predictions: Sequence[str],
                 missing_gold: Sequence[str]) -> None:
        parts = []
        if missing_predictions:
            parts.append(f"gold ids without predictions: {sorted(missing_predictions)}")
        if missing_gold:
            parts.append(f"prediction ids without gold: {sorted(missing_gold)}")
        super().__init__("; ".join(parts))
        self.missing_predictions = tuple(missing_predictions)
        self.missing_gold = tuple(missing_gold)


class EmptyGoldError(AnnologError):
    pass


def classify_prediction(predicted: Sequence[str], gold: str,
                        taxonomy: TypeTaxonomy) -> Verdict:
    """Verdict for one question.  All type names must be in the taxonomy."""
    taxonomy.require(gold)
    for type_name in predicted:
        taxonomy.require(type_name)
    if not predicted:
        return Verdict.NO_PREDICTION
    if gold in predicted:
        return Verdict.CORRECT
    if any(taxonomy.strictly_subsumes(p, gold) for p in predicted):
        return Verdict.SUPERTYPE
    return Verdict.WRONG


@dataclass(frozen=True)
class EvalReport:
    verdicts: Tuple[Tuple[str, Verdict], ...]  # (question id, verdict) in gold order
    counts: Dict[Verdict, int]
    accuracy_percent: Decimal

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_json_dict(self) -> dict:
        return {
            "verdicts": [{"id": qid, "verdict": verdict.value}
                         for qid, verdict in self.verdicts],
            "counts": {verdict.value: self.counts[verdict] for verdict in Verdict},
            "total": self.total,
            "accuracy_percent": str(self.accuracy_percent),
        }


def _accuracy_percent(correct: int, total: int) -> Decimal:
    # Exact integer arithmetic, then one decimal with round-half-up.
    return (Decimal(correct) * 100 / Decimal(total)).quantize(
        Decimal("0.1"), rounding=ROUND_HALF_UP)


def score(predictions: Dict[str, Sequence[str]], gold: Dict[str, str],
          taxonomy: TypeTaxonomy,
          gold_order: Optional[Sequence[str]] = None) -> EvalReport:
    """Score aligned prediction/gold maps keyed by question id."""
    if not gold:
        raise EmptyGoldError("no gold questions to evaluate")
    missing_predictions = [qid for qid in gold if qid not in predictions]
    missing_gold = [qid for qid in predictions if qid not in gold]
    if missing_predictions or missing_gold:
        raise IdMismatchError(missing_predictions, missing_gold)

    order = list(gold_order) if gold_order is not None else list(gold)
    verdicts: List[Tuple[str, Verdict]] = []
    counts = {verdict: 0 for verdict in Verdict}
    for qid in order:
        verdict = classify_prediction(list(predictions[qid]), gold[qid], taxonomy)
        verdicts.append((qid, verdict))
        counts[verdict] += 1
    accuracy = _accuracy_percent(counts[Verdict.CORRECT], len(order))
    return EvalReport(tuple(verdicts), counts, accuracy)


def _load_json(path: str):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def evaluate(predictions_path: str, gold_path: str,
             taxonomy: TypeTaxonomy) -> EvalReport:
    """Score a predictions file against a gold file.

    The gold file is a JSON array of ``{"id": str, "type": str}``; the
    predictions file a JSON array of ``{"id": str, "types": [str]}``.
    """
    gold_rows = _load_json(gold_path)
    prediction_rows = _load_json(predictions_path)
    gold = {row["id"]: row["type"] for row in gold_rows}
    predictions = {row["id"]: row.get("types", []) for row in prediction_rows}
    if len(gold) != len(gold_rows):
        raise IdMismatchError([], ["duplicate gold ids"])
    return score(predictions, gold, taxonomy,
                 gold_order=[row["id"] for row in gold_rows])


def format_report(report: EvalReport) -> str:
    """The report as an aligned text table: one row per question, then the
    aggregate counts and accuracy."""
    width = max([len("question")] + [len(qid) for qid, _ in report.verdicts])
    lines = [f"{'question'.ljust(width)}  verdict"]
    lines.append(f"{'-' * width}  {'-' * len('NoPrediction')}")
    for qid, verdict in report.verdicts:
        lines.append(f"{qid.ljust(width)}  {verdict.value}")
    lines.append("")
    for verdict in Verdict:
        lines.append(f"{verdict.value.ljust(width)}  {report.counts[verdict]}")
    lines.append(f"{'total'.ljust(width)}  {report.total}")
    lines.append(f"{'accuracy'.ljust(width)}  {report.accuracy_percent}%")
    return "\n".join(lines)
