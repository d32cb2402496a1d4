"""Synthetic two-site corpus generator.

A generator spec carries master surface pools and sentence templates that
are split in half between two simulated sites. Site "a" always uses the
first half; site "b" draws a fraction of the first half plus material from
the reserved second half, controlled by the institution-shift knob: shift 0
makes both sites identical (same pools, same templates, and with the same
seed the same corpus), shift 1 gives site "b" fully disjoint surface pools
and templates.

Sampling uses a PCG64 generator (numpy ``default_rng``) with a fixed walk:
per document one draw for the sentence count, then per sentence one draw for
the template and one per slot for the surface.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .corpus import Corpus, LabelSet, build_document

_SLOT = re.compile(r"\{([A-Za-z0-9_]+)\}")

SYNTH_CATEGORIES: tuple[str, ...] = (
    "tumor_size",
    "tumor_site",
    "cancer_grade",
    "receptor_status",
)

_MASTER_POOLS: dict[str, tuple[str, ...]] = {
    # First half: site "a" material. Second half: reserved for site "b"
    # under nonzero shift. Halves are disjoint by construction.
    "tumor_size": (
        "1.2 cm", "3 mm", "2.5 cm", "14 mm", "0.8 cm", "4.1 cm", "22 mm", "1.0 cm",
        "5 mm", "3.3 cm", "17 mm", "0.6 cm", "2.9 cm", "11 mm", "6.4 cm", "9 mm",
    ),
    "tumor_site": (
        "left breast", "right breast", "upper outer quadrant", "lower inner quadrant",
        "axillary tail", "central duct", "areolar margin", "lateral lobe",
        "medial wall", "subareolar region", "inner quadrant", "chest wall",
        "upper pole", "ductal segment", "outer margin", "apical node",
    ),
    "cancer_grade": (
        "grade 1", "grade 2", "grade 3", "low grade",
        "high grade", "intermediate grade", "nuclear grade 2", "nottingham grade 3",
        "grade i", "grade ii", "grade iii", "nuclear grade 1",
        "nottingham grade 1", "combined grade 2", "histologic grade 3", "elston grade 2",
    ),
    "receptor_status": (
        "er positive", "er negative", "pr positive", "pr negative",
        "her2 positive", "her2 negative", "triple negative", "weakly positive",
        "strongly positive", "er equivocal", "pr equivocal", "her2 equivocal",
        "focally positive", "borderline positive", "diffusely positive", "her2 amplified",
    ),
}

_MASTER_TEMPLATES: tuple[str, ...] = (
    # First half: site "a" contexts.
    "the invasive tumor measures {tumor_size} in greatest dimension .",
    "biopsy of the {tumor_site} shows carcinoma , {cancer_grade} .",
    "receptor panel returned {receptor_status} on review .",
    "a mass spanning {tumor_size} was excised from the {tumor_site} .",
    "pathology confirms {cancer_grade} disease with {receptor_status} staining .",
    "margins are clear around the {tumor_site} specimen .",
    "the lesion , {tumor_size} overall , is {cancer_grade} .",
    "immunohistochemistry reports {receptor_status} expression .",
    # Second half: reserved site "b" contexts.
    "sonographic measurement records {tumor_size} at follow up .",
    "core sampling from the {tumor_site} demonstrates malignancy graded {cancer_grade} .",
    "staining profile indicates {receptor_status} by current criteria .",
    "resection specimen contains a {tumor_size} focus within the {tumor_site} .",
    "tumor board notes {cancer_grade} histology and {receptor_status} markers .",
    "no residual disease near the {tumor_site} after excision .",
    "the nodule , approximately {tumor_size} , is classified {cancer_grade} .",
    "marker assays describe {receptor_status} reactivity .",
)


@dataclass(frozen=True)
class SynthSpec:
    """Generator parameters; see the module docstring for site semantics."""

    label_set: LabelSet
    surface_pools: Mapping[str, tuple[str, ...]]
    templates: tuple[str, ...]
    num_documents: int = 40
    min_sentences: int = 3
    max_sentences: int = 6
    site: str = "a"
    shift: float = 0.0
    name: str = "synthetic"

    def __post_init__(self) -> None:
        if not self.templates:
            raise ValueError("template list must not be empty")
        if self.site not in ("a", "b"):
            raise ValueError("site must be 'a' or 'b'")
        if not 0.0 <= self.shift <= 1.0:
            raise ValueError("shift must lie in [0, 1]")
        if self.num_documents < 1:
            raise ValueError("num_documents must be positive")
        if not 1 <= self.min_sentences <= self.max_sentences:
            raise ValueError("need 1 <= min_sentences <= max_sentences")
        for category, pool in self.surface_pools.items():
            if category not in self.label_set:
                raise ValueError(f"pool category {category!r} not in label set")
            if len(pool) < 2:
                raise ValueError(f"pool for {category!r} needs at least two surfaces")
            if len(set(pool)) != len(pool):
                raise ValueError(f"pool for {category!r} contains duplicates")


def default_synth_spec(
    site: str = "a",
    shift: float = 0.0,
    num_documents: int = 40,
    name: str = "synthetic",
) -> SynthSpec:
    """Built-in four-category breast-pathology flavored spec."""
    return SynthSpec(
        label_set=LabelSet(SYNTH_CATEGORIES),
        surface_pools=dict(_MASTER_POOLS),
        templates=_MASTER_TEMPLATES,
        site=site,
        shift=shift,
        num_documents=num_documents,
        name=name,
    )


def _site_portion(items: tuple[str, ...], site: str, shift: float) -> tuple[str, ...]:
    half = len(items) // 2
    if site == "a":
        return tuple(items[:half])
    kept = int(round((1.0 - shift) * half))
    return tuple(items[:kept]) + tuple(items[half : half + (half - kept)])


def site_pools(spec: SynthSpec) -> dict[str, tuple[str, ...]]:
    """Effective per-category surface pools for the spec's site and shift."""
    return {
        category: _site_portion(tuple(pool), spec.site, spec.shift)
        for category, pool in spec.surface_pools.items()
    }


def site_templates(spec: SynthSpec) -> tuple[str, ...]:
    return _site_portion(spec.templates, spec.site, spec.shift)


def generate_synthetic(spec: SynthSpec, seed: int) -> Corpus:
    """Generate a deterministic corpus from ``spec``.

    Every output passes the same validation as a loaded corpus; entity spans
    always align with token boundaries. Sentences are joined with newlines so
    re-derived segmentation matches the generated sentences exactly.
    """
    pools = site_pools(spec)
    templates = site_templates(spec)
    if not templates:
        # a one-element master list leaves the site half empty
        raise ValueError(f"no templates available for site {spec.site!r}")
    for template in templates:
        for match in _SLOT.finditer(template):
            category = match.group(1)
            if category not in spec.label_set:
                raise ValueError(
                    f"template slot {category!r} is not a label-set category"
                )
            if not pools.get(category):
                raise ValueError(f"no surfaces available for category {category!r}")
    rng = np.random.default_rng(seed)
    documents = []
    for d in range(spec.num_documents):
        doc_type = "clinical_note" if d % 2 == 0 else "pathology_report"
        n_sentences = int(
            rng.integers(spec.min_sentences, spec.max_sentences + 1)
        )
        parts: list[str] = []
        entities: list[tuple[int, int, str]] = []
        offset = 0
        for s in range(n_sentences):
            template = templates[int(rng.integers(0, len(templates)))]
            cursor = 0
            for match in _SLOT.finditer(template):
                category = match.group(1)
                pool = pools[category]
                surface = pool[int(rng.integers(0, len(pool)))]
                before = template[cursor : match.start()]
                parts.append(before)
                offset += len(before)
                parts.append(surface)
                entities.append((offset, offset + len(surface), category))
                offset += len(surface)
                cursor = match.end()
            tail = template[cursor:]
            parts.append(tail)
            offset += len(tail)
            if s < n_sentences - 1:
                parts.append("\n")
                offset += 1
        documents.append(
            build_document(
                f"doc{d:04d}", doc_type, "".join(parts), entities, spec.label_set
            )
        )
    return Corpus(spec.name, spec.label_set, tuple(documents))


def site_pair(
    shift: float,
    seed_a: int,
    seed_b: int,
    num_documents: int = 40,
) -> tuple[Corpus, Corpus]:
    """Convenience: default-spec corpora for site "a" and a shifted site "b"."""
    spec_a = default_synth_spec(site="a", shift=shift, num_documents=num_documents, name="site_a")
    spec_b = default_synth_spec(site="b", shift=shift, num_documents=num_documents, name="site_b")
    return generate_synthetic(spec_a, seed_a), generate_synthetic(spec_b, seed_b)


def spec_from_mapping(data: Mapping[str, object]) -> SynthSpec:
    """Build a spec from a parsed JSON object (the CLI ``--spec`` file)."""
    base = default_synth_spec()
    categories = data.get("categories")
    label_set = LabelSet(tuple(categories)) if categories else base.label_set
    pools = data.get("surface_pools")
    templates = data.get("templates")
    return SynthSpec(
        label_set=label_set,
        surface_pools=(
            {c: tuple(p) for c, p in pools.items()} if pools else dict(base.surface_pools)
        ),
        templates=tuple(templates) if templates else base.templates,
        num_documents=int(data.get("num_documents", base.num_documents)),
        min_sentences=int(data.get("min_sentences", base.min_sentences)),
        max_sentences=int(data.get("max_sentences", base.max_sentences)),
        site=str(data.get("site", base.site)),
        shift=float(data.get("shift", base.shift)),
        name=str(data.get("name", base.name)),
    )


def with_site(spec: SynthSpec, site: str, shift: float | None = None) -> SynthSpec:
    if shift is None:
        return replace(spec, site=site)
    return replace(spec, site=site, shift=shift)
