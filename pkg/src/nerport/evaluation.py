"""Span-level NER evaluation: greedy mention matching, precision/recall/F1,
micro and macro aggregation.

Two match modes:

* ``strict``  - identical boundaries and category
* ``lenient`` - at least one overlapping character and identical category

Matching is one-to-one: predictions are processed in start-offset order and
each takes the first unmatched compatible gold mention, also in start-offset
order. Ties break on (start, end, category name).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

from .corpus import Corpus, EntityMention

MatchMode = Literal["strict", "lenient"]

MATCH_MODES: tuple[str, ...] = ("strict", "lenient")

_ORDER = lambda m: (m.start, m.end, m.category)  # noqa: E731


def _check_mode(mode: str) -> None:
    if mode not in MATCH_MODES:
        raise ValueError(f"unknown match mode {mode!r}; expected one of {MATCH_MODES}")


def compatible(gold: EntityMention, pred: EntityMention, mode: MatchMode) -> bool:
    if gold.category != pred.category:
        return False
    if mode == "strict":
        return gold.start == pred.start and gold.end == pred.end
    return pred.start < gold.end and pred.end > gold.start


def match_mentions(
    gold: Sequence[EntityMention],
    pred: Sequence[EntityMention],
    mode: MatchMode,
) -> tuple[
    tuple[tuple[EntityMention, EntityMention], ...],
    tuple[EntityMention, ...],
    tuple[EntityMention, ...],
]:
    """Greedy one-to-one matching within one document.

    Returns (matched pairs, unmatched gold, unmatched predictions). Every
    mention lands in exactly one of the three outputs.
    """
    _check_mode(mode)
    gold_sorted = sorted(gold, key=_ORDER)
    pred_sorted = sorted(pred, key=_ORDER)
    taken = [False] * len(gold_sorted)
    pairs: list[tuple[EntityMention, EntityMention]] = []
    unmatched_pred: list[EntityMention] = []
    for p in pred_sorted:
        for gi, g in enumerate(gold_sorted):
            if not taken[gi] and compatible(g, p, mode):
                taken[gi] = True
                pairs.append((g, p))
                break
        else:
            unmatched_pred.append(p)
    unmatched_gold = tuple(g for gi, g in enumerate(gold_sorted) if not taken[gi])
    return tuple(pairs), unmatched_gold, tuple(unmatched_pred)


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision, recall, F1 from match counts; all 0/0 cases are 0."""
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be non-negative")
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall
        else 0.0
    )
    return precision, recall, f1


@dataclass(frozen=True)
class Scores:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "Scores":
        p, r, f = prf(tp, fp, fn)
        return cls(tp, fp, fn, p, r, f)


@dataclass(frozen=True)
class EvalReport:
    """Per-category, micro (pooled counts), and macro (unweighted mean over
    categories with any gold or predicted mention) scores."""

    mode: str
    per_category: Mapping[str, Scores]
    micro: Scores
    macro_precision: float
    macro_recall: float
    macro_f1: float
    gold_corpus: str
    pred_corpus: str

    @property
    def micro_f1(self) -> float:
        return self.micro.f1


def evaluate(gold: Corpus, pred: Corpus, mode: MatchMode) -> EvalReport:
    """Score a prediction corpus against gold.

    The prediction corpus may omit documents (scored as zero predictions)
    but must not contain document ids absent from gold.
    """
    _check_mode(mode)
    gold_ids = {doc.id for doc in gold.documents}
    for doc in pred.documents:
        if doc.id not in gold_ids:
            raise ValueError(
                f"prediction corpus contains unknown document id {doc.id!r}"
            )
    pred_by_id = {doc.id: doc for doc in pred.documents}
    tp: dict[str, int] = {c: 0 for c in gold.label_set}
    fp: dict[str, int] = {c: 0 for c in gold.label_set}
    fn: dict[str, int] = {c: 0 for c in gold.label_set}
    for doc in gold.documents:
        pred_doc = pred_by_id.get(doc.id)
        pred_mentions = pred_doc.mentions if pred_doc is not None else ()
        pairs, unmatched_gold, unmatched_pred = match_mentions(
            doc.mentions, pred_mentions, mode
        )
        for g, _ in pairs:
            tp[g.category] += 1
        for g in unmatched_gold:
            fn[g.category] += 1
        for p in unmatched_pred:
            fp[p.category] += 1
    per_category = {
        c: Scores.from_counts(tp[c], fp[c], fn[c]) for c in gold.label_set
    }
    micro = Scores.from_counts(
        sum(tp.values()), sum(fp.values()), sum(fn.values())
    )
    active = [
        c
        for c in gold.label_set
        if tp[c] + fp[c] + fn[c] > 0
    ]
    if active:
        macro_p = sum(per_category[c].precision for c in active) / len(active)
        macro_r = sum(per_category[c].recall for c in active) / len(active)
        macro_f = sum(per_category[c].f1 for c in active) / len(active)
    else:
        macro_p = macro_r = macro_f = 0.0
    return EvalReport(
        mode=mode,
        per_category=per_category,
        micro=micro,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f,
        gold_corpus=gold.name,
        pred_corpus=pred.name,
    )
