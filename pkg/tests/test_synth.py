"""Synthetic generator tests: site pool arithmetic, determinism, validity."""

import numpy as np
import pytest

from nerport.corpus import corpus_to_bytes
from nerport.ecr import entity_counts
from nerport.synth import (
    SYNTH_CATEGORIES,
    SynthSpec,
    default_synth_spec,
    generate_synthetic,
    site_pair,
    site_pools,
    site_templates,
    spec_from_mapping,
    with_site,
)


class TestSitePortions:
    def test_site_a_always_first_half(self):
        for shift in (0.0, 0.3, 1.0):
            spec = default_synth_spec(site="a", shift=shift)
            pools = site_pools(spec)
            for category, pool in pools.items():
                master = spec.surface_pools[category]
                assert pool == tuple(master[: len(master) // 2])

    def test_shift_zero_sites_share_everything(self):
        spec_a = default_synth_spec(site="a", shift=0.0)
        spec_b = default_synth_spec(site="b", shift=0.0)
        assert site_pools(spec_a) == site_pools(spec_b)
        assert site_templates(spec_a) == site_templates(spec_b)

    def test_shift_one_sites_disjoint(self):
        spec_a = default_synth_spec(site="a", shift=1.0)
        spec_b = default_synth_spec(site="b", shift=1.0)
        pools_a, pools_b = site_pools(spec_a), site_pools(spec_b)
        for category in SYNTH_CATEGORIES:
            assert not set(pools_a[category]) & set(pools_b[category])
        assert not set(site_templates(spec_a)) & set(site_templates(spec_b))

    def test_partial_shift_mixes_halves(self):
        spec_b = default_synth_spec(site="b", shift=0.5)
        pools = site_pools(spec_b)
        for category, pool in pools.items():
            master = spec_b.surface_pools[category]
            half = len(master) // 2
            kept = int(round(0.5 * half))
            assert len(pool) == half
            assert pool[:kept] == tuple(master[:kept])
            assert set(pool[kept:]) <= set(master[half:])

    def test_pool_size_constant_across_shift(self):
        for shift in (0.0, 0.25, 0.6, 1.0):
            pools = site_pools(default_synth_spec(site="b", shift=shift))
            for pool in pools.values():
                assert len(pool) == 8


class TestSpecValidation:
    def test_bad_site(self):
        with pytest.raises(ValueError, match="site"):
            default_synth_spec(site="c")

    def test_bad_shift(self):
        with pytest.raises(ValueError, match="shift"):
            default_synth_spec(shift=1.5)

    def test_bad_num_documents(self):
        with pytest.raises(ValueError, match="num_documents"):
            default_synth_spec(num_documents=0)

    def test_bad_sentence_range(self):
        base = default_synth_spec()
        with pytest.raises(ValueError, match="min_sentences"):
            SynthSpec(
                label_set=base.label_set,
                surface_pools=base.surface_pools,
                templates=base.templates,
                min_sentences=5,
                max_sentences=3,
            )

    def test_pool_category_outside_label_set(self):
        base = default_synth_spec()
        with pytest.raises(ValueError, match="not in label set"):
            SynthSpec(
                label_set=base.label_set,
                surface_pools={**dict(base.surface_pools), "bogus": ("x", "y")},
                templates=base.templates,
            )

    def test_duplicate_pool_surfaces(self):
        base = default_synth_spec()
        pools = dict(base.surface_pools)
        pools["tumor_size"] = ("3 mm", "3 mm")
        with pytest.raises(ValueError, match="duplicates"):
            SynthSpec(
                label_set=base.label_set,
                surface_pools=pools,
                templates=base.templates,
            )

    def test_template_slot_outside_label_set(self):
        base = default_synth_spec()
        spec = SynthSpec(
            label_set=base.label_set,
            surface_pools=base.surface_pools,
            templates=("the {mystery} finding .", "second {mystery} note ."),
        )
        with pytest.raises(ValueError, match="label-set category"):
            generate_synthetic(spec, 0)

    def test_empty_site_half_rejected(self):
        base = default_synth_spec()
        spec = SynthSpec(
            label_set=base.label_set,
            surface_pools=base.surface_pools,
            templates=("margins are clear .",),
        )
        with pytest.raises(ValueError, match="no templates available"):
            generate_synthetic(spec, 0)


class TestGenerate:
    def test_deterministic(self):
        spec = default_synth_spec(num_documents=6)
        first = generate_synthetic(spec, seed=3)
        second = generate_synthetic(spec, seed=3)
        assert corpus_to_bytes(first) == corpus_to_bytes(second)

    def test_seed_changes_output(self):
        spec = default_synth_spec(num_documents=6)
        assert corpus_to_bytes(generate_synthetic(spec, 3)) != corpus_to_bytes(
            generate_synthetic(spec, 4)
        )

    def test_doc_ids_and_types(self):
        corpus = generate_synthetic(default_synth_spec(num_documents=5), seed=0)
        assert [doc.id for doc in corpus.documents] == [
            "doc0000", "doc0001", "doc0002", "doc0003", "doc0004",
        ]
        assert [doc.doc_type for doc in corpus.documents] == [
            "clinical_note", "pathology_report", "clinical_note",
            "pathology_report", "clinical_note",
        ]

    def test_sentence_counts_in_range(self):
        spec = default_synth_spec(num_documents=12)
        corpus = generate_synthetic(spec, seed=5)
        for doc in corpus.documents:
            assert spec.min_sentences <= len(doc.sentences) <= spec.max_sentences

    def test_mentions_match_site_pools(self):
        spec = default_synth_spec(site="b", shift=0.6, num_documents=10)
        pools = site_pools(spec)
        corpus = generate_synthetic(spec, seed=7)
        seen = set()
        for doc in corpus.documents:
            for mention in doc.mentions:
                assert doc.text[mention.start:mention.end] == mention.surface
                assert mention.surface in pools[mention.category]
                seen.add(mention.category)
        assert seen == set(SYNTH_CATEGORIES)

    def test_every_category_appears(self):
        corpus = generate_synthetic(default_synth_spec(num_documents=20), seed=1)
        counts = entity_counts(corpus)
        by_category: dict[str, int] = {}
        for per_category in counts.values():
            for category, count in per_category.items():
                by_category[category] = by_category.get(category, 0) + count
        for category in SYNTH_CATEGORIES:
            assert by_category.get(category, 0) > 0

    def test_site_pair_names_and_shift_zero_identity(self):
        a, b = site_pair(0.0, seed_a=2, seed_b=2, num_documents=4)
        assert a.name == "site_a"
        assert b.name == "site_b"
        # same pools, templates and seed: identical material
        assert [d.text for d in a.documents] == [d.text for d in b.documents]

    def test_site_pair_shift_one_disjoint_surfaces(self):
        a, b = site_pair(1.0, seed_a=2, seed_b=3, num_documents=10)
        surfaces_a = {m.surface for d in a.documents for m in d.mentions}
        surfaces_b = {m.surface for d in b.documents for m in d.mentions}
        assert surfaces_a and surfaces_b
        assert not surfaces_a & surfaces_b


class TestSpecFromMapping:
    def test_defaults(self):
        spec = spec_from_mapping({})
        assert spec == default_synth_spec()

    def test_overrides(self):
        spec = spec_from_mapping(
            {
                "categories": ["alpha", "beta"],
                "surface_pools": {"alpha": ["x1", "x2"], "beta": ["y1", "y2"]},
                "templates": ["saw {alpha} near {beta} .", "note of {alpha} ."],
                "num_documents": 3,
                "min_sentences": 1,
                "max_sentences": 2,
                "site": "b",
                "shift": 0.5,
                "name": "custom",
            }
        )
        assert tuple(spec.label_set) == ("alpha", "beta")
        assert spec.num_documents == 3
        assert spec.site == "b"
        assert spec.shift == 0.5
        assert spec.name == "custom"
        corpus = generate_synthetic(with_site(spec, "a", shift=0.0), seed=0)
        assert len(corpus.documents) == 3

    def test_with_site(self):
        spec = default_synth_spec(shift=0.4)
        moved = with_site(spec, "b")
        assert moved.site == "b"
        assert moved.shift == 0.4
        moved2 = with_site(spec, "b", shift=0.9)
        assert moved2.shift == 0.9
