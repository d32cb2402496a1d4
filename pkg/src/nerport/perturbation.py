"""Permutation stress test: rebuild a test corpus with gold entity spans
replaced by same-category donor surfaces unseen in an exclusion corpus.

The donor pool for a category holds every unique normalized surface from the
donor corpus's gold mentions of that category that never occurs as a gold
surface (under any category) in the exclusion corpus. Replacement sampling
is uniform with replacement from a PCG64 generator (numpy ``default_rng``)
seeded by the caller: exactly one ``integers(0, pool_size)`` draw per
replaced mention, walking documents in corpus order and mentions in start
order. Mentions whose category pool is empty stay unchanged and consume no
draw.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .corpus import Corpus, build_document

REPLACEMENT_LOG_FIELDS: tuple[str, ...] = (
    "doc_id",
    "category",
    "status",
    "original_start",
    "original_end",
    "original_surface",
    "replacement_surface",
    "new_start",
    "new_end",
)


@dataclass(frozen=True)
class DonorPool:
    """Per-category normalized donor surfaces plus one original-cased
    representative span text for each (first occurrence in the donor)."""

    surfaces: Mapping[str, tuple[str, ...]]
    representatives: Mapping[str, Mapping[str, str]]

    def size(self, category: str) -> int:
        return len(self.surfaces.get(category, ()))


@dataclass(frozen=True)
class Replacement:
    """One audit-log row; ``replacement_surface`` is None for a mention
    skipped because its category pool was empty."""

    doc_id: str
    category: str
    original_start: int
    original_end: int
    original_surface: str
    replacement_surface: str | None
    new_start: int
    new_end: int

    @property
    def replaced(self) -> bool:
        return self.replacement_surface is not None


def build_donor_pool(donor: Corpus, exclusion: Corpus) -> DonorPool:
    """Unique donor surfaces per category, minus every surface occurring
    anywhere in the exclusion corpus. Surfaces are sorted for determinism."""
    if donor.label_set != exclusion.label_set:
        raise ValueError("corpora must share a label set")
    excluded = {m.surface for m in exclusion.mentions()}
    reps: dict[str, dict[str, str]] = {c: {} for c in donor.label_set}
    for doc in donor.documents:
        for m in doc.mentions:
            if m.surface in excluded or m.surface in reps[m.category]:
                continue
            # Representative keeps original casing; internal whitespace is
            # collapsed so insertion into rebuilt text stays single-line.
            reps[m.category][m.surface] = " ".join(
                doc.text[m.start : m.end].split()
            )
    surfaces = {c: tuple(sorted(reps[c])) for c in donor.label_set}
    return DonorPool(
        surfaces=surfaces,
        representatives={c: dict(reps[c]) for c in donor.label_set},
    )


def permute_test_set(
    test: Corpus, pool: DonorPool, seed: int
) -> tuple[Corpus, tuple[Replacement, ...]]:
    """Rebuild ``test`` with every gold mention replaced by a uniformly
    sampled same-category donor surface.

    Document text is reassembled around the new spans, offsets shift
    accordingly, and tokens/sentences are re-derived, so the result passes
    the same validation as a loaded corpus. Categories and the total mention
    count are preserved. Deterministic for a given seed.
    """
    rng = np.random.default_rng(seed)
    new_docs = []
    log: list[Replacement] = []
    for doc in test.documents:
        parts: list[str] = []
        entities: list[tuple[int, int, str]] = []
        out_len = 0
        last = 0
        for m in doc.mentions:  # sorted by start; gold is non-overlapping
            prefix = doc.text[last : m.start]
            parts.append(prefix)
            out_len += len(prefix)
            original_span = doc.text[m.start : m.end]
            surfaces = pool.surfaces.get(m.category, ())
            if surfaces:
                index = int(rng.integers(0, len(surfaces)))
                surface = surfaces[index]
                replacement = pool.representatives[m.category][surface]
                # Preserve one space of original edge whitespace outside the
                # new span so re-tokenization stays stable.
                lead = " " if original_span[:1].isspace() else ""
                trail = " " if original_span[-1:].isspace() else ""
                insert = lead + replacement + trail
                new_start = out_len + len(lead)
                new_end = new_start + len(replacement)
                log.append(
                    Replacement(
                        doc_id=doc.id,
                        category=m.category,
                        original_start=m.start,
                        original_end=m.end,
                        original_surface=m.surface,
                        replacement_surface=surface,
                        new_start=new_start,
                        new_end=new_end,
                    )
                )
            else:
                insert = original_span
                new_start = out_len
                new_end = out_len + len(insert)
                log.append(
                    Replacement(
                        doc_id=doc.id,
                        category=m.category,
                        original_start=m.start,
                        original_end=m.end,
                        original_surface=m.surface,
                        replacement_surface=None,
                        new_start=new_start,
                        new_end=new_end,
                    )
                )
            parts.append(insert)
            out_len += len(insert)
            entities.append((new_start, new_end, m.category))
            last = m.end
        parts.append(doc.text[last:])
        new_docs.append(
            build_document(
                doc.id, doc.doc_type, "".join(parts), entities, test.label_set
            )
        )
    permuted = Corpus(f"{test.name}-permuted", test.label_set, tuple(new_docs))
    return permuted, tuple(log)


def write_replacement_log(
    log: tuple[Replacement, ...] | list[Replacement],
    path: str | os.PathLike[str],
) -> None:
    """CSV audit trail: one row per mention, replaced or skipped."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(REPLACEMENT_LOG_FIELDS)
        for entry in log:
            writer.writerow(
                [
                    entry.doc_id,
                    entry.category,
                    "replaced" if entry.replaced else "skipped",
                    entry.original_start,
                    entry.original_end,
                    entry.original_surface,
                    entry.replacement_surface or "",
                    entry.new_start,
                    entry.new_end,
                ]
            )
