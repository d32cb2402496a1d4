"""Corpus-to-corpus lexical similarity via averaged TF-IDF vectors.

A corpus is summarized as one vector over its case-folded token vocabulary:
each term's weight is the average over documents of term frequency (count in
the document divided by document length) times inverse document frequency.
Two IDF variants exist:

* ``paper``    - log(N) / df(t)   (default)
* ``standard`` - log(N / df(t))

Category vectors reuse the corpus weights but restrict the vocabulary to
terms occurring inside gold mentions of that category. Similarity is the
cosine over the union vocabulary; a zero vector has similarity 0 to anything.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping

from .corpus import Corpus

IDF_VARIANTS: tuple[str, ...] = ("paper", "standard")


@dataclass(frozen=True)
class TermWeights:
    """A weighted term vector: scope ("corpus" or a category name), the
    number of documents it was computed from, per-term weights, and per-term
    document frequencies."""

    scope: str
    num_documents: int
    weights: Mapping[str, float]
    df: Mapping[str, int]

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.weights.values()))

    def normalized(self) -> "TermWeights":
        """L2-normalized copy, for persistence and reporting."""
        n = self.norm()
        if n == 0.0:
            return self
        return TermWeights(
            self.scope,
            self.num_documents,
            {t: w / n for t, w in self.weights.items()},
            dict(self.df),
        )


def _check_variant(variant: str) -> None:
    if variant not in IDF_VARIANTS:
        raise ValueError(
            f"unknown IDF variant {variant!r}; expected one of {IDF_VARIANTS}"
        )


def corpus_tfidf(corpus: Corpus, variant: str = "paper") -> TermWeights:
    """Averaged TF-IDF weights over the whole corpus vocabulary.

    weight(t) = (1/N) * sum_i TF_i(t) * IDF(t), reduced over sorted terms so
    results are bit-deterministic. Raises on an empty corpus.
    """
    _check_variant(variant)
    if not corpus.documents:
        raise ValueError(f"corpus {corpus.name!r} is empty")
    n_docs = len(corpus.documents)
    df: Counter[str] = Counter()
    tf_sums: dict[str, float] = {}
    for doc in corpus.documents:
        terms = [tok.text.casefold() for tok in doc.tokens]
        total = len(terms)
        if not total:
            continue
        counts = Counter(terms)
        for term, count in counts.items():
            df[term] += 1
            tf_sums[term] = tf_sums.get(term, 0.0) + count / total
    weights: dict[str, float] = {}
    for term in sorted(tf_sums):
        if variant == "paper":
            idf = math.log(n_docs) / df[term]
        else:
            idf = math.log(n_docs / df[term])
        weights[term] = tf_sums[term] * idf / n_docs
    return TermWeights(
        "corpus", n_docs, weights, {t: df[t] for t in sorted(df)}
    )


def category_tfidf(
    corpus: Corpus, category: str, variant: str = "paper"
) -> TermWeights:
    """Corpus TF-IDF weights restricted to terms inside gold mentions of
    ``category``. A category with no mentions yields an empty vector."""
    if category not in corpus.label_set:
        raise ValueError(f"unknown category {category!r}")
    base = corpus_tfidf(corpus, variant)
    vocab: set[str] = set()
    for doc in corpus.documents:
        spans = [
            (m.start, m.end) for m in doc.mentions if m.category == category
        ]
        if not spans:
            continue
        for tok in doc.tokens:
            for start, end in spans:
                if tok.start < end and tok.end > start:
                    vocab.add(tok.text.casefold())
                    break
    weights = {t: base.weights[t] for t in sorted(vocab) if t in base.weights}
    df = {t: base.df[t] for t in sorted(vocab) if t in base.df}
    return TermWeights(category, base.num_documents, weights, df)


def cosine(a: TermWeights, b: TermWeights) -> float:
    """Cosine similarity over the union vocabulary, exactly symmetric.

    The dot product is accumulated over the sorted shared vocabulary, so
    cosine(a, b) and cosine(b, a) are bit-identical. Returns 0.0 when either
    vector has zero norm; the result is clamped to [0, 1] (weights are
    non-negative, so only float rounding can stray outside).
    """
    norm_a = a.norm()
    norm_b = b.norm()
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    shared = sorted(a.weights.keys() & b.weights.keys())
    dot = 0.0
    for term in shared:
        dot += a.weights[term] * b.weights[term]
    return min(1.0, max(0.0, dot / (norm_a * norm_b)))


@dataclass(frozen=True)
class SimilarityReport:
    """Overall and per-category similarity between two corpora."""

    corpus_a: str
    corpus_b: str
    variant: str
    overall: float
    per_category: Mapping[str, float]
    category_mean: float
    overall_vocab: tuple[int, int]
    per_category_vocab: Mapping[str, tuple[int, int]]


def similarity_report(
    a: Corpus, b: Corpus, variant: str = "paper"
) -> SimilarityReport:
    """Overall cosine, per-category cosines, and their unweighted mean.

    The mean covers categories with at least one gold mention in either
    corpus; structurally absent categories would contribute a spurious 0.
    """
    if a.label_set != b.label_set:
        raise ValueError("corpora must share a label set")
    weights_a = corpus_tfidf(a, variant)
    weights_b = corpus_tfidf(b, variant)
    overall = cosine(weights_a, weights_b)
    present_a = {m.category for m in a.mentions()}
    present_b = {m.category for m in b.mentions()}
    per_category: dict[str, float] = {}
    per_category_vocab: dict[str, tuple[int, int]] = {}
    mean_values: list[float] = []
    for category in a.label_set:
        cat_a = category_tfidf(a, category, variant)
        cat_b = category_tfidf(b, category, variant)
        value = cosine(cat_a, cat_b)
        per_category[category] = value
        per_category_vocab[category] = (len(cat_a.weights), len(cat_b.weights))
        if category in present_a or category in present_b:
            mean_values.append(value)
    category_mean = (
        sum(mean_values) / len(mean_values) if mean_values else 0.0
    )
    return SimilarityReport(
        corpus_a=a.name,
        corpus_b=b.name,
        variant=variant,
        overall=overall,
        per_category=per_category,
        category_mean=category_mean,
        overall_vocab=(len(weights_a.weights), len(weights_b.weights)),
        per_category_vocab=per_category_vocab,
    )
