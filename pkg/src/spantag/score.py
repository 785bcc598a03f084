"""Span-level micro-averaged F1 with proportional character overlap.

Every (predicted, gold) pair of same-technique spans in the same snippet
contributes its character overlap, normalized by the predicted span's
length on the precision side and by the gold span's length on the recall
side:

    P  = (1/|S|) * sum over s in S of sum over t in T of |s ∩ t| / |s|
    R  = (1/|T|) * sum over t in T of sum over s in S of |s ∩ t| / |t|
    F1 = 2PR / (P + R)

S is all predicted spans, T all gold spans, across the whole corpus.
When both sides are empty every metric is 1.0 by convention; when
exactly one side is empty, 0.0. By default a span may collect more than
1.0 of credit by overlapping several counterparts; ``cap_per_span``
clips each span's credit at 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .corpus import LabelSet, TechniqueSpan
from .tagger import Strategy

_STRATEGY_ROW_NAMES = {
    Strategy.TOKEN_TO_TOKEN: "Token-to-Token",
    Strategy.TOKEN_TO_WORD_MAJORITY: "Token-to-Word Majority",
    Strategy.TOKEN_TO_WORD_FIRST: "Token-to-Word First",
    Strategy.WORD_TO_WORD: "Word-to-Word",
}


class ScoreError(ValueError):
    """Prediction/gold mismatch or malformed span."""


def span_overlap(s: TechniqueSpan, t: TechniqueSpan) -> int:
    """Characters shared by two spans of the same technique, else 0."""
    if s.technique != t.technique:
        return 0
    return max(0, min(s.end, t.end) - max(s.start, t.start))


@dataclass(frozen=True)
class TechniqueScore:
    precision: float
    recall: float
    f1: float
    pred_count: int
    gold_count: int


@dataclass(frozen=True)
class ScoreReport:
    precision: float
    recall: float
    micro_f1: float
    per_technique: Mapping[int, TechniqueScore]
    pred_count: int
    gold_count: int
    label_names: tuple[str, ...] | None = None

    def technique_name(self, technique: int) -> str:
        if self.label_names and 0 <= technique < len(self.label_names):
            return self.label_names[technique]
        return f"technique-{technique}"

    def as_dict(self) -> dict[str, Any]:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "micro_f1": self.micro_f1,
            "spans": {"predicted": self.pred_count, "gold": self.gold_count},
            "per_technique": {
                self.technique_name(k): {
                    "precision": v.precision,
                    "recall": v.recall,
                    "f1": v.f1,
                    "predicted": v.pred_count,
                    "gold": v.gold_count,
                }
                for k, v in sorted(self.per_technique.items())
            },
        }

    def render(self) -> str:
        lines = [
            f"spans: {self.pred_count} predicted, {self.gold_count} gold",
            f"micro F1: {self.micro_f1 * 100:.2f}  "
            f"(P {self.precision * 100:.2f}, R {self.recall * 100:.2f})",
        ]
        if self.per_technique:
            lines.append("per technique:")
            name_width = max(
                len(self.technique_name(k)) for k in self.per_technique
            )
            for k, s in sorted(self.per_technique.items()):
                lines.append(
                    f"  {self.technique_name(k):<{name_width}}  "
                    f"P {s.precision * 100:6.2f}  R {s.recall * 100:6.2f}  "
                    f"F1 {s.f1 * 100:6.2f}  ({s.pred_count} pred, {s.gold_count} gold)"
                )
        return "\n".join(lines)


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _credit(span: TechniqueSpan, others: Sequence[TechniqueSpan], cap: bool) -> float:
    total = sum(span_overlap(span, o) / span.length for o in others)
    return min(1.0, total) if cap else total


def micro_f1(
    gold: Mapping[str, Sequence[TechniqueSpan]],
    pred: Mapping[str, Sequence[TechniqueSpan]],
    label_set: LabelSet | None = None,
    cap_per_span: bool = False,
) -> ScoreReport:
    """Score predictions against gold, overall and per technique.

    Both arguments map snippet id to that snippet's spans. Every
    predicted id must exist in gold; gold ids without predictions count
    as empty predictions.
    """
    unknown = sorted(set(pred) - set(gold))
    if unknown:
        raise ScoreError(f"prediction for unknown snippet id {unknown[0]!r}")

    p_sums: dict[int, float] = {}
    r_sums: dict[int, float] = {}
    pred_counts: dict[int, int] = {}
    gold_counts: dict[int, int] = {}
    for snippet_id, gold_spans in gold.items():
        pred_spans = pred.get(snippet_id, ())
        for span in (*gold_spans, *pred_spans):
            if span.length <= 0:
                raise ScoreError(
                    f"snippet {snippet_id!r}: span [{span.start}, {span.end}) "
                    "has non-positive length"
                )
        for s in pred_spans:
            pred_counts[s.technique] = pred_counts.get(s.technique, 0) + 1
            p_sums[s.technique] = p_sums.get(s.technique, 0.0) + _credit(
                s, gold_spans, cap_per_span
            )
        for t in gold_spans:
            gold_counts[t.technique] = gold_counts.get(t.technique, 0) + 1
            r_sums[t.technique] = r_sums.get(t.technique, 0.0) + _credit(
                t, pred_spans, cap_per_span
            )

    n_pred = sum(pred_counts.values())
    n_gold = sum(gold_counts.values())
    if n_pred == 0 and n_gold == 0:
        precision = recall = f1 = 1.0
    else:
        precision = sum(p_sums.values()) / n_pred if n_pred else 0.0
        recall = sum(r_sums.values()) / n_gold if n_gold else 0.0
        f1 = _f1(precision, recall)

    per_technique: dict[int, TechniqueScore] = {}
    for k in sorted(set(pred_counts) | set(gold_counts)):
        kp = pred_counts.get(k, 0)
        kg = gold_counts.get(k, 0)
        tp = p_sums.get(k, 0.0) / kp if kp else 0.0
        tr = r_sums.get(k, 0.0) / kg if kg else 0.0
        per_technique[k] = TechniqueScore(tp, tr, _f1(tp, tr), kp, kg)

    return ScoreReport(
        precision,
        recall,
        f1,
        per_technique,
        n_pred,
        n_gold,
        tuple(label_set.names) if label_set is not None else None,
    )


def ablation_table(
    results: Mapping[tuple[Strategy, bool], "ScoreReport | float"],
) -> str:
    """Markdown grid of micro-F1 x100: strategy rows, genre on/off columns.

    Values may be ScoreReports or plain fractions in [0, 1]. Rows and
    columns with no cells are dropped; remaining gaps render as an em
    dash substitute "—"; each column's maximum is bolded.
    """
    if not results:
        raise ScoreError("ablation table needs at least one cell")

    def cell_value(value: "ScoreReport | float") -> float:
        return value.micro_f1 if isinstance(value, ScoreReport) else float(value)

    rows = [s for s in _STRATEGY_ROW_NAMES if any((s, g) in results for g in (True, False))]
    cols = [g for g in (True, False) if any((s, g) in results for s in rows)]
    rendered: dict[tuple[Strategy, bool], str] = {}
    for col in cols:
        values = {
            row: round(cell_value(results[(row, col)]) * 100, 2)
            for row in rows
            if (row, col) in results
        }
        best = max(values.values())
        for row, val in values.items():
            text = f"{val:.2f}"
            rendered[(row, col)] = f"**{text}**" if val == best else text

    headers = ["Strategy"] + ["With genre" if c else "Without genre" for c in cols]
    table_rows = [
        [_STRATEGY_ROW_NAMES[row]] + [rendered.get((row, col), "—") for col in cols]
        for row in rows
    ]
    widths = [
        max(len(headers[i]), *(len(r[i]) for r in table_rows))
        for i in range(len(headers))
    ]

    def fmt(cells: list[str]) -> str:
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"

    lines = [fmt(headers), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    lines.extend(fmt(r) for r in table_rows)
    return "\n".join(lines)
