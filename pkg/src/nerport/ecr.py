"""Entity coverage ratio (ECR): how well the training data covers each test
entity surface, and difficulty-bucketed evaluation built on top of it.

For a normalized surface with per-category train counts tr_k and test counts
te_k::

    ECR = 0                                   if sum_k tr_k == 0
    ECR = (sum_k tr_k * te_k / C_tr) / C_te   otherwise

where C_tr and C_te are the total train/test counts of that surface. ECR is
1 exactly when the surface occurs under a single shared category in both
sides. Buckets: [0, 0.33), [0.33, 0.67), [0.67, 1), and exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import Corpus, EntityMention
from .evaluation import MatchMode, Scores, match_mentions

BUCKET_BOUNDS: tuple[float, float, float] = (0.33, 0.67, 1.0)
BUCKET_LABELS: tuple[str, ...] = (
    "[0.00,0.33)",
    "[0.33,0.67)",
    "[0.67,1.00)",
    "1.00",
)
NUM_BUCKETS = 4


@dataclass(frozen=True)
class EcrRecord:
    """Coverage of one normalized test surface by the training data."""

    surface: str
    train_counts: Mapping[str, int]
    test_counts: Mapping[str, int]
    c_train: int
    c_test: int
    ecr: float


def entity_counts(corpus: Corpus) -> dict[str, dict[str, int]]:
    """Normalized surface -> category -> mention count, sorted keys."""
    counts: dict[str, dict[str, int]] = {}
    for doc in corpus.documents:
        for m in doc.mentions:
            per_cat = counts.setdefault(m.surface, {})
            per_cat[m.category] = per_cat.get(m.category, 0) + 1
    return {
        surface: dict(sorted(counts[surface].items()))
        for surface in sorted(counts)
    }


def ecr(
    train_counts: Mapping[str, int], test_counts: Mapping[str, int]
) -> float:
    """Coverage ratio for one surface from per-category count maps.

    Arithmetic follows the two-division form (overlap / C_tr) / C_te so that
    independent recounts agree bit-for-bit.
    """
    if any(v < 0 for v in train_counts.values()) or any(
        v < 0 for v in test_counts.values()
    ):
        raise ValueError("counts must be non-negative")
    c_test = sum(test_counts.values())
    if c_test < 1:
        raise ValueError("surface must occur in the test side (C_te >= 1)")
    c_train = sum(train_counts.values())
    if c_train == 0:
        return 0.0
    overlap = sum(
        train_counts.get(category, 0) * count
        for category, count in sorted(test_counts.items())
    )
    return (overlap / c_train) / c_test


def ecr_table(train: Corpus, test: Corpus) -> tuple[EcrRecord, ...]:
    """One record per unique normalized surface in the test corpus."""
    if train.label_set != test.label_set:
        raise ValueError("corpora must share a label set")
    train_counts = entity_counts(train)
    test_counts = entity_counts(test)
    records: list[EcrRecord] = []
    for surface in sorted(test_counts):
        tr = train_counts.get(surface, {})
        te = test_counts[surface]
        records.append(
            EcrRecord(
                surface=surface,
                train_counts=tr,
                test_counts=te,
                c_train=sum(tr.values()),
                c_test=sum(te.values()),
                ecr=ecr(tr, te),
            )
        )
    return tuple(records)


def bucket_of(value: float) -> int:
    """Bucket index 0..3 for an ECR value; exactly 1 is the last bucket."""
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"ECR value out of range: {value!r}")
    if value < 0.33:
        return 0
    if value < 0.67:
        return 1
    if value < 1.0:
        return 2
    return 3


@dataclass(frozen=True)
class BucketScores:
    label: str
    gold_mentions: int
    pred_mentions: int
    scores: Scores


@dataclass(frozen=True)
class EcrBucketReport:
    mode: str
    buckets: tuple[BucketScores, ...]


def per_bucket_eval(
    gold: Corpus,
    pred: Corpus,
    table: Sequence[EcrRecord],
    mode: MatchMode,
    train_counts: Mapping[str, Mapping[str, int]] | None = None,
) -> EcrBucketReport:
    """Precision/recall/F1 per ECR bucket.

    Gold mentions take the ECR of their surface from ``table`` (a missing
    gold surface is an error: the table must come from this test corpus).
    Predicted mentions take their own surface's table ECR; surfaces absent
    from the table get ECR recomputed from ``train_counts`` with the
    prediction's own per-category counts as the test side (no train counts
    provided means unseen, ECR 0). Matching is restricted to the mentions of
    each bucket, pooling categories.
    """
    ecr_by_surface = {record.surface: record.ecr for record in table}
    pred_counts = entity_counts(pred)
    pred_ecr: dict[str, float] = {}
    for surface in pred_counts:
        if surface in ecr_by_surface:
            pred_ecr[surface] = ecr_by_surface[surface]
        else:
            tr = dict(train_counts.get(surface, {})) if train_counts else {}
            pred_ecr[surface] = ecr(tr, pred_counts[surface])

    def gold_bucket(m: EntityMention) -> int:
        if m.surface not in ecr_by_surface:
            raise ValueError(
                f"gold surface {m.surface!r} missing from the ECR table; "
                "the table must be computed from this test corpus"
            )
        return bucket_of(ecr_by_surface[m.surface])

    pred_by_id = {doc.id: doc for doc in pred.documents}
    tp = [0] * NUM_BUCKETS
    fp = [0] * NUM_BUCKETS
    fn = [0] * NUM_BUCKETS
    gold_totals = [0] * NUM_BUCKETS
    pred_totals = [0] * NUM_BUCKETS
    for doc in gold.documents:
        pred_doc = pred_by_id.get(doc.id)
        pred_mentions = pred_doc.mentions if pred_doc is not None else ()
        gold_in: list[list[EntityMention]] = [[] for _ in range(NUM_BUCKETS)]
        pred_in: list[list[EntityMention]] = [[] for _ in range(NUM_BUCKETS)]
        for m in doc.mentions:
            gold_in[gold_bucket(m)].append(m)
        for m in pred_mentions:
            pred_in[bucket_of(pred_ecr[m.surface])].append(m)
        for b in range(NUM_BUCKETS):
            gold_totals[b] += len(gold_in[b])
            pred_totals[b] += len(pred_in[b])
            pairs, unmatched_gold, unmatched_pred = match_mentions(
                gold_in[b], pred_in[b], mode
            )
            tp[b] += len(pairs)
            fn[b] += len(unmatched_gold)
            fp[b] += len(unmatched_pred)
    buckets = tuple(
        BucketScores(
            label=BUCKET_LABELS[b],
            gold_mentions=gold_totals[b],
            pred_mentions=pred_totals[b],
            scores=Scores.from_counts(tp[b], fp[b], fn[b]),
        )
        for b in range(NUM_BUCKETS)
    )
    return EcrBucketReport(mode=mode, buckets=buckets)
