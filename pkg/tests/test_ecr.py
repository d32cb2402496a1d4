import random

import pytest

from nerport.corpus import Corpus, LabelSet, build_document
from nerport.ecr import (
    BUCKET_LABELS,
    bucket_of,
    ecr,
    ecr_table,
    entity_counts,
    per_bucket_eval,
)


def corpus_of_surfaces(name, docs, labels4):
    """docs: list of lists of (surface_token, category); one doc per list."""
    documents = []
    for i, pairs in enumerate(docs):
        words = [w for w, _ in pairs]
        text = " ".join(words)
        entities = []
        offset = 0
        for word, category in pairs:
            if category is not None:
                entities.append((offset, offset + len(word), category))
            offset += len(word) + 1
        documents.append(
            build_document(f"d{name}{i}", "clinical_note", text, entities, labels4)
        )
    return Corpus(name, labels4, tuple(documents))


class TestEcrValue:
    def test_unseen_surface_is_zero(self):
        assert ecr({}, {"cancer_grade": 2}) == 0.0

    def test_single_shared_category_is_exactly_one(self):
        assert ecr({"cancer_grade": 7}, {"cancer_grade": 3}) == 1.0

    def test_mixed_categories_hand_case(self):
        # train 3 grade + 1 size, test 2 grade: ((3*2)/4)/2 = 0.75
        value = ecr({"cancer_grade": 3, "tumor_size": 1}, {"cancer_grade": 2})
        assert value == 0.75

    def test_two_division_order_is_pinned(self):
        # (overlap / c_train) / c_test, not overlap / (c_train * c_test)
        train = {"a": 1, "b": 2}
        test = {"a": 3, "b": 1}
        overlap = 1 * 3 + 2 * 1
        assert ecr(train, test) == (overlap / 3) / 4

    def test_train_only_categories_dilute(self):
        assert ecr({"a": 1, "b": 1}, {"a": 1}) == 0.5

    def test_empty_test_side_rejected(self):
        with pytest.raises(ValueError, match="test side"):
            ecr({"a": 1}, {})

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            ecr({"a": -1}, {"a": 1})

    def test_range_on_random_count_maps(self):
        rng = random.Random(11)
        cats = ["a", "b", "c"]
        for _ in range(500):
            train = {c: rng.randint(0, 5) for c in cats if rng.random() < 0.7}
            test = {c: rng.randint(1, 5) for c in cats if rng.random() < 0.7}
            if not test:
                test = {"a": 1}
            value = ecr(train, test)
            assert 0.0 <= value <= 1.0


class TestEcrTable:
    def make_pair(self, labels4):
        train = corpus_of_surfaces("tr", [
            [("alpha", "cancer_grade"), ("alpha", "cancer_grade"), ("beta", "tumor_size")],
            [("alpha", "cancer_grade"), ("gamma", "tumor_site")],
        ], labels4)
        test = corpus_of_surfaces("te", [
            [("alpha", "cancer_grade"), ("beta", "cancer_grade"), ("delta", "tumor_size")],
        ], labels4)
        return train, test

    def test_one_record_per_test_surface_sorted(self, labels4):
        train, test = self.make_pair(labels4)
        table = ecr_table(train, test)
        assert [r.surface for r in table] == ["alpha", "beta", "delta"]

    def test_values(self, labels4):
        train, test = self.make_pair(labels4)
        by_surface = {r.surface: r for r in ecr_table(train, test)}
        assert by_surface["alpha"].ecr == 1.0  # grade-only on both sides
        # beta: train size 1, test grade 1: no category overlap
        assert by_surface["beta"].ecr == 0.0
        assert by_surface["delta"].ecr == 0.0  # unseen
        assert by_surface["alpha"].c_train == 3
        assert by_surface["alpha"].c_test == 1

    def test_matches_independent_recount(self, labels4):
        rng = random.Random(3)
        surfaces = ["s%d" % i for i in range(8)]
        cats = list(labels4)

        def random_corpus(name, docs):
            return corpus_of_surfaces(name, [
                [(rng.choice(surfaces), rng.choice(cats)) for _ in range(rng.randint(1, 6))]
                for _ in range(docs)
            ], labels4)

        for trial in range(20):
            train = random_corpus(f"tr{trial}", 4)
            test = random_corpus(f"te{trial}", 3)
            table = ecr_table(train, test)
            # recount from raw mentions, reapplying the two-division formula
            tr_counts, te_counts = {}, {}
            for corpus, store in ((train, tr_counts), (test, te_counts)):
                for m in corpus.mentions():
                    store.setdefault(m.surface, {}).setdefault(m.category, 0)
                    store[m.surface][m.category] += 1
            assert len(table) == len(te_counts)
            for record in table:
                tr = tr_counts.get(record.surface, {})
                te = te_counts[record.surface]
                c_tr = sum(tr.values())
                c_te = sum(te.values())
                if c_tr == 0:
                    expected = 0.0
                else:
                    overlap = sum(tr.get(c, 0) * n for c, n in sorted(te.items()))
                    expected = (overlap / c_tr) / c_te
                assert record.ecr == expected  # bit-exact, not approx

    def test_label_set_mismatch(self, labels4):
        train, test = self.make_pair(labels4)
        other = Corpus("o", LabelSet(("x",)), (
            build_document("d", "clinical_note", "x", [], LabelSet(("x",))),
        ))
        with pytest.raises(ValueError, match="label set"):
            ecr_table(train, other)


class TestBuckets:
    @pytest.mark.parametrize("value,expected", [
        (0.0, 0),
        (0.3299999, 0),
        (0.33, 1),
        (0.5, 1),
        (0.6699999, 1),
        (0.67, 2),
        (0.99999, 2),
        (1.0, 3),
    ])
    def test_edges(self, value, expected):
        assert bucket_of(value) == expected

    def test_exact_thirds_from_division(self):
        # 1/3 < 0.33 is false in binary floats: 1/3 = 0.333... lands in bucket 1
        assert bucket_of(1 / 3) == 1
        assert bucket_of(2 / 3) == 1  # 2/3 < 0.67
        assert bucket_of((2 / 3) + 0.01) == 2

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            bucket_of(-0.1)
        with pytest.raises(ValueError):
            bucket_of(1.1)

    def test_labels_line_up(self):
        assert len(BUCKET_LABELS) == 4
        assert BUCKET_LABELS[bucket_of(1.0)] == "1.00"


class TestPerBucketEval:
    def make(self, labels4):
        train = corpus_of_surfaces("tr", [
            [("alpha", "cancer_grade"), ("alpha", "cancer_grade")],
            [("gamma", "tumor_size")],
        ], labels4)
        gold = corpus_of_surfaces("te", [
            [("alpha", "cancer_grade"), ("beta", "cancer_grade")],
        ], labels4)
        return train, gold

    def test_bucketed_scores(self, labels4):
        train, gold = self.make(labels4)
        table = ecr_table(train, gold)
        # predictions: alpha exact (covered bucket), beta exact (unseen bucket)
        pred = corpus_of_surfaces("te", [
            [("alpha", "cancer_grade"), ("beta", "cancer_grade")],
        ], labels4)
        report = per_bucket_eval(gold, pred, table, "strict",
                                 train_counts=entity_counts(train))
        unseen, covered = report.buckets[0], report.buckets[3]
        assert covered.gold_mentions == 1 and covered.scores.tp == 1
        assert unseen.gold_mentions == 1 and unseen.scores.tp == 1
        assert report.buckets[1].gold_mentions == 0
        assert report.buckets[2].gold_mentions == 0

    def test_pred_only_surface_uses_train_counts(self, labels4):
        train, gold = self.make(labels4)
        table = ecr_table(train, gold)
        # "gamma" is absent from the gold test corpus but present in train as
        # tumor_size; predicting it as tumor_size gives ECR 1 -> bucket 3 fp
        pred = corpus_of_surfaces("te", [
            [("alpha", "cancer_grade"), ("beta", "cancer_grade"), ("gamma", "tumor_size")],
        ], labels4)
        report = per_bucket_eval(gold, pred, table, "strict",
                                 train_counts=entity_counts(train))
        assert report.buckets[3].pred_mentions == 2  # alpha + gamma
        assert report.buckets[3].scores.fp == 1

    def test_pred_only_surface_without_train_counts_is_unseen(self, labels4):
        train, gold = self.make(labels4)
        table = ecr_table(train, gold)
        pred = corpus_of_surfaces("te", [
            [("gamma", "tumor_size")],
        ], labels4)
        report = per_bucket_eval(gold, pred, table, "strict")
        assert report.buckets[0].pred_mentions == 1

    def test_gold_surface_missing_from_table_is_error(self, labels4):
        train, gold = self.make(labels4)
        table = ecr_table(train, gold)[:1]  # drop beta's record
        pred = corpus_of_surfaces("te", [[("alpha", "cancer_grade")]], labels4)
        with pytest.raises(ValueError, match="missing from the ECR table"):
            per_bucket_eval(gold, pred, table, "strict")
