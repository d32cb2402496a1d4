"""CRF tagger tests.

The numerical core is checked against closed-form oracles that share no code
with the implementation: brute-force enumeration over all label sequences for
the partition function, marginals and Viterbi, and central finite differences
for the gradient.
"""

import itertools
import json
import math

import numpy as np
import pytest
from sklearn.base import clone

from nerport.corpus import Corpus, LabelSet, Token, build_document, concat_corpora
from nerport.crf import (
    CrfModel,
    CrfTagger,
    EmbeddingTable,
    FeatureConfig,
    TrainConfig,
    bio_labels,
    extract_features,
    fine_tune,
    flatten_gradient,
    forward_backward,
    log_sum_exp,
    objective_and_gradient,
    predict,
    sequence_log_potentials,
    token_shape,
    train,
    viterbi,
)
from nerport.evaluation import evaluate


def make_tokens(words: list[str]) -> list[Token]:
    tokens = []
    pos = 0
    for word in words:
        tokens.append(Token(word, pos, pos + len(word)))
        pos += len(word) + 1
    return tokens


def corpus_from(name, pairs, label_set):
    """(doc_id, text, [(surface, category), ...]) triples -> Corpus."""
    docs = []
    for doc_id, text, ments in pairs:
        entities = []
        for surface, category in ments:
            start = text.index(surface)
            entities.append((start, start + len(surface), category))
        docs.append(build_document(doc_id, "clinical_note", text, entities, label_set))
    return Corpus(name, label_set, tuple(docs))


@pytest.fixture
def memorization_corpus(labels4) -> Corpus:
    pairs = [
        ("m1", "Tumor size 12 mm in the left breast.",
         [("12 mm", "tumor_size"), ("left breast", "tumor_site")]),
        ("m2", "Nuclear grade 2 lesion, ER positive.",
         [("grade 2", "cancer_grade"), ("ER positive", "receptor_status")]),
        ("m3", "The mass measures 7 mm at the upper pole.",
         [("7 mm", "tumor_size"), ("upper pole", "tumor_site")]),
        ("m4", "Biopsy shows grade 3 carcinoma, PR negative.",
         [("grade 3", "cancer_grade"), ("PR negative", "receptor_status")]),
        ("m5", "Tumor size 12 mm in the left breast.",
         [("12 mm", "tumor_size"), ("left breast", "tumor_site")]),
        ("m6", "Nuclear grade 2 lesion, ER positive.",
         [("grade 2", "cancer_grade"), ("ER positive", "receptor_status")]),
        ("m7", "The mass measures 7 mm at the upper pole.",
         [("7 mm", "tumor_size"), ("upper pole", "tumor_site")]),
        ("m8", "Biopsy shows grade 3 carcinoma, PR negative.",
         [("grade 3", "cancer_grade"), ("PR negative", "receptor_status")]),
    ]
    return corpus_from("memo", pairs, labels4)


@pytest.fixture
def labels2() -> LabelSet:
    return LabelSet(("tumor_size", "cancer_grade"))


@pytest.fixture
def small_corpus(labels2) -> Corpus:
    pairs = [
        ("s1", "Tumor size 12 mm, grade 2.",
         [("12 mm", "tumor_size"), ("grade 2", "cancer_grade")]),
        ("s2", "Lesion of grade 3 noted, size 7 mm.",
         [("grade 3", "cancer_grade"), ("7 mm", "tumor_size")]),
        ("s3", "No residual tumor seen.", []),
    ]
    return corpus_from("small", pairs, labels2)


class TestBioLabels:
    def test_order(self, labels4):
        assert bio_labels(labels4) == (
            "O",
            "B-tumor_size", "I-tumor_size",
            "B-tumor_site", "I-tumor_site",
            "B-cancer_grade", "I-cancer_grade",
            "B-receptor_status", "I-receptor_status",
        )

    def test_outside_first(self, labels2):
        labels = bio_labels(labels2)
        assert labels[0] == "O"
        assert len(labels) == 1 + 2 * len(labels2)


class TestTokenShape:
    @pytest.mark.parametrize(
        "text,shape",
        [
            ("ER", "XX"),
            ("12mm", "99xx"),
            ("Grade", "Xxxxx"),
            ("+", "+"),
            ("T1c", "X9x"),
            ("", ""),
        ],
    )
    def test_shapes(self, text, shape):
        assert token_shape(text) == shape


class TestFeatureExtraction:
    def test_pinned_names(self):
        tokens = make_tokens(["Grade", "2", "tumor"])
        config = FeatureConfig(window=1, affix_lengths=(1, 2), shape_features=True)
        feats = dict(extract_features(tokens, 0, config))
        assert feats == {
            "bias": 1.0,
            "w=grade": 1.0,
            "shape=Xxxxx": 1.0,
            "pre1=g": 1.0,
            "suf1=e": 1.0,
            "pre2=gr": 1.0,
            "suf2=de": 1.0,
            "w[-1]=<s>": 1.0,
            "w[+1]=2": 1.0,
        }

    def test_digit_and_symbol_flags(self):
        tokens = make_tokens(["2", "+"])
        config = FeatureConfig(window=0, affix_lengths=(), shape_features=True)
        feats0 = dict(extract_features(tokens, 0, config))
        assert feats0["isdigit"] == 1.0
        assert "issymbol" not in feats0
        feats1 = dict(extract_features(tokens, 1, config))
        assert feats1["issymbol"] == 1.0
        assert "isdigit" not in feats1

    def test_window_sentinels(self):
        tokens = make_tokens(["a", "b"])
        config = FeatureConfig(window=2, affix_lengths=(), shape_features=False)
        feats = dict(extract_features(tokens, 1, config))
        assert feats["w[-2]=<s>"] == 1.0
        assert feats["w[-1]=a"] == 1.0
        assert feats["w[+1]=</s>"] == 1.0
        assert feats["w[+2]=</s>"] == 1.0

    def test_affixes_skip_short_tokens(self):
        tokens = make_tokens(["ab"])
        config = FeatureConfig(window=0, affix_lengths=(1, 2, 3), shape_features=False)
        names = {name for name, _ in extract_features(tokens, 0, config)}
        assert "pre2=ab" in names and "suf2=ab" in names
        assert not any(name.startswith(("pre3", "suf3")) for name in names)

    def test_position_out_of_range(self):
        tokens = make_tokens(["a"])
        with pytest.raises(ValueError, match="out of range"):
            extract_features(tokens, 1, FeatureConfig())

    def test_embedding_features(self, tmp_path):
        path = tmp_path / "vectors.txt"
        path.write_text("size 0.5 -1.25\nmm 2.0 3.5\n", encoding="utf-8")
        table = EmbeddingTable.load(path, 2)
        np.testing.assert_array_equal(table.lookup("size"), [0.5, -1.25])
        np.testing.assert_array_equal(table.lookup("unknown"), [0.0, 0.0])
        tokens = make_tokens(["Size"])
        config = FeatureConfig(window=0, affix_lengths=(), shape_features=False)
        feats = dict(extract_features(tokens, 0, config, table))
        assert feats["emb0"] == 0.5
        assert feats["emb1"] == -1.25

    def test_embedding_bad_line(self, tmp_path):
        path = tmp_path / "vectors.txt"
        path.write_text("size 0.5 -1.25\nmm 2.0\n", encoding="utf-8")
        with pytest.raises(ValueError, match=r"vectors\.txt:2: expected a word and 2 values"):
            EmbeddingTable.load(path, 2)


class TestConfigValidation:
    def test_negative_window(self):
        with pytest.raises(ValueError, match="window"):
            FeatureConfig(window=-1)

    def test_bad_affix(self):
        with pytest.raises(ValueError, match="affix"):
            FeatureConfig(affix_lengths=(0,))

    def test_embeddings_need_dim(self):
        with pytest.raises(ValueError, match="embedding_dim"):
            FeatureConfig(embeddings_path="x.txt", embedding_dim=0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"learning_rate": 0.0},
            {"iterations": -1},
            {"l2": -0.1},
            {"dev_eval_interval": -1},
        ],
    )
    def test_train_config_rejects(self, kwargs):
        with pytest.raises(ValueError):
            TrainConfig(**kwargs)


class TestLogSumExp:
    def test_matches_direct(self):
        rng = np.random.default_rng(0)
        values = rng.normal(size=17)
        expected = math.log(np.exp(values).sum())
        assert log_sum_exp(values) == pytest.approx(expected, rel=1e-12)

    def test_stable_at_extremes(self):
        assert log_sum_exp(np.array([1000.0, 1000.0])) == pytest.approx(
            1000.0 + math.log(2.0), rel=1e-12
        )
        assert log_sum_exp(np.array([-1000.0, -1001.0])) == pytest.approx(
            -1000.0 + math.log(1 + math.exp(-1.0)), rel=1e-12
        )

    def test_axis(self):
        values = np.array([[0.0, 1.0], [2.0, 3.0]])
        by_row = log_sum_exp(values, axis=1)
        assert by_row.shape == (2,)
        assert by_row[0] == pytest.approx(math.log(1 + math.e), rel=1e-12)


def enumeration_oracle(state, transitions, start, end):
    """Partition function and marginals by summing every label sequence."""
    n_tokens, n_labels = state.shape
    seqs = list(itertools.product(range(n_labels), repeat=n_tokens))
    scores = np.empty(len(seqs))
    for i, seq in enumerate(seqs):
        total = start[seq[0]] + end[seq[-1]]
        for t, y in enumerate(seq):
            total += state[t, y]
        for t in range(n_tokens - 1):
            total += transitions[seq[t], seq[t + 1]]
        scores[i] = total
    highest = scores.max()
    log_z = highest + math.log(np.exp(scores - highest).sum())
    probs = np.exp(scores - log_z)
    node = np.zeros((n_tokens, n_labels))
    edge = np.zeros((max(n_tokens - 1, 0), n_labels, n_labels))
    for prob, seq in zip(probs, seqs):
        for t, y in enumerate(seq):
            node[t, y] += prob
        for t in range(n_tokens - 1):
            edge[t, seq[t], seq[t + 1]] += prob
    return log_z, node, edge


class TestForwardBackward:
    @pytest.mark.parametrize("n_tokens", [1, 2, 3, 4, 6])
    @pytest.mark.parametrize("n_labels", [2, 3, 4])
    def test_matches_enumeration(self, n_tokens, n_labels):
        rng = np.random.default_rng(100 * n_tokens + n_labels)
        state = rng.normal(size=(n_tokens, n_labels)) * 2.0
        transitions = rng.normal(size=(n_labels, n_labels))
        start = rng.normal(size=n_labels)
        end = rng.normal(size=n_labels)
        log_z, node, edge = forward_backward(state, transitions, start, end)
        exp_log_z, exp_node, exp_edge = enumeration_oracle(
            state, transitions, start, end
        )
        assert math.exp(log_z) == pytest.approx(math.exp(exp_log_z), rel=1e-9)
        np.testing.assert_allclose(node, exp_node, atol=1e-9)
        if n_tokens > 1:
            np.testing.assert_allclose(edge, exp_edge, atol=1e-9)
        else:
            assert edge.shape == (0, n_labels, n_labels)

    def test_node_marginals_normalized(self):
        rng = np.random.default_rng(11)
        state = rng.normal(size=(5, 4))
        transitions = rng.normal(size=(4, 4))
        start = rng.normal(size=4)
        end = rng.normal(size=4)
        _, node, edge = forward_backward(state, transitions, start, end)
        np.testing.assert_allclose(node.sum(axis=1), 1.0, atol=1e-12)
        # edge marginals must be consistent with node marginals
        np.testing.assert_allclose(edge.sum(axis=2), node[:-1], atol=1e-12)
        np.testing.assert_allclose(edge.sum(axis=1), node[1:], atol=1e-12)


class TestGradient:
    def test_matches_finite_differences(self, small_corpus):
        config = FeatureConfig(window=1, affix_lengths=(1,), shape_features=False)
        model = train(
            small_corpus,
            feature_config=config,
            train_config=TrainConfig(iterations=5, learning_rate=0.3),
        )
        l2 = 0.05
        base = model.flat_weights().copy()
        _, gradient = objective_and_gradient(model, small_corpus, l2)
        analytic = flatten_gradient(gradient)
        assert analytic.shape == base.shape

        def objective_at(vector):
            model.set_flat_weights(vector)
            value, _ = objective_and_gradient(model, small_corpus, l2)
            return value

        h = 1e-5
        for i in range(base.size):
            bumped = base.copy()
            bumped[i] += h
            upper = objective_at(bumped)
            bumped[i] -= 2 * h
            lower = objective_at(bumped)
            fd = (upper - lower) / (2 * h)
            assert analytic[i] == pytest.approx(fd, rel=1e-4, abs=1e-6), (
                f"coordinate {i}: analytic {analytic[i]} vs finite difference {fd}"
            )

    def test_gradient_zero_only_at_optimum(self, small_corpus):
        # a freshly initialized model (all-zero weights) is not the optimum
        model = train(
            small_corpus,
            feature_config=FeatureConfig(window=0, affix_lengths=(), shape_features=False),
            train_config=TrainConfig(iterations=0),
        )
        _, gradient = objective_and_gradient(model, small_corpus, 0.01)
        assert np.abs(flatten_gradient(gradient)).max() > 0

    def test_empty_corpus_rejected(self, labels2):
        model = train(
            corpus_from("c", [("d1", "grade 2", [("grade 2", "cancer_grade")])], labels2),
            train_config=TrainConfig(iterations=1),
        )
        empty = Corpus("empty", labels2, ())
        with pytest.raises(ValueError, match="no sentences"):
            objective_and_gradient(model, empty, 0.01)


def brute_force_viterbi(model, tokens):
    scores = sequence_log_potentials(model, tokens)
    n_labels = len(model.labels)
    best_score = -math.inf
    best_seq = None
    for seq in itertools.product(range(n_labels), repeat=len(tokens)):
        total = model.start_weights[seq[0]] + model.end_weights[seq[-1]]
        for t, y in enumerate(seq):
            total += scores[t, y]
        for t in range(len(tokens) - 1):
            total += model.transitions[seq[t], seq[t + 1]]
        if total > best_score:
            best_score = total
            best_seq = seq
    return tuple(model.labels[i] for i in best_seq), best_score


class TestViterbi:
    @pytest.fixture
    def skeleton(self, small_corpus):
        return train(
            small_corpus,
            feature_config=FeatureConfig(window=1, affix_lengths=(1,), shape_features=True),
            train_config=TrainConfig(iterations=2),
        )

    def test_matches_exhaustive_on_random_weights(self, skeleton):
        vocab = ["grade", "2", "3", "tumor", "size", "mm", "seen", "no", "of", "noted"]
        rng = np.random.default_rng(42)
        n_weights = skeleton.flat_weights().size
        for _ in range(200):
            skeleton.set_flat_weights(rng.normal(size=n_weights))
            length = int(rng.integers(1, 6))
            words = [vocab[int(rng.integers(0, len(vocab)))] for _ in range(length)]
            tokens = make_tokens(words)
            decoded = viterbi(skeleton, tokens)
            expected, best_score = brute_force_viterbi(skeleton, tokens)
            assert decoded == expected, (words, decoded, expected, best_score)

    def test_zero_weights_decode_outside(self, skeleton):
        # with every path tied, the first-max tie break keeps label index 0
        skeleton.set_flat_weights(np.zeros(skeleton.flat_weights().size))
        tokens = make_tokens(["grade", "2", "tumor"])
        assert viterbi(skeleton, tokens) == ("O", "O", "O")

    def test_positive_scaling_invariance(self, skeleton):
        rng = np.random.default_rng(9)
        vector = rng.normal(size=skeleton.flat_weights().size)
        tokens = make_tokens(["tumor", "size", "12", "mm"])
        skeleton.set_flat_weights(vector)
        before = viterbi(skeleton, tokens)
        skeleton.set_flat_weights(2.5 * vector)
        assert viterbi(skeleton, tokens) == before

    def test_empty_sentence(self, skeleton):
        assert viterbi(skeleton, []) == ()


class TestTraining:
    def test_memorizes_training_data(self, memorization_corpus):
        model = train(
            memorization_corpus,
            train_config=TrainConfig(iterations=150, learning_rate=0.5, l2=0.01),
        )
        preds = predict(model, memorization_corpus)
        report = evaluate(memorization_corpus, preds, "strict")
        assert report.micro.f1 >= 0.95

    def test_objective_strictly_increases(self, memorization_corpus):
        model = train(
            memorization_corpus,
            train_config=TrainConfig(iterations=50, learning_rate=0.5, l2=0.01),
        )
        objectives = model.metadata["objectives"]
        assert len(objectives) == 50
        assert model.metadata["final_objective"] == objectives[-1]
        diffs = np.diff(objectives)
        assert (diffs > 0).all(), f"objective not monotone at {np.argmin(diffs)}"

    def test_retrain_is_bit_identical(self, memorization_corpus, tmp_path):
        config = TrainConfig(iterations=20)
        first = train(memorization_corpus, train_config=config)
        second = train(memorization_corpus, train_config=config)
        np.testing.assert_array_equal(first.flat_weights(), second.flat_weights())
        path_a, path_b = tmp_path / "a.json", tmp_path / "b.json"
        first.save(path_a)
        second.save(path_b)
        assert path_a.read_bytes() == path_b.read_bytes()

    def test_zero_init(self, memorization_corpus):
        model = train(memorization_corpus, train_config=TrainConfig(iterations=0))
        assert not model.flat_weights().any()
        assert model.metadata["final_objective"] is None
        assert model.metadata["objectives"] == []

    def test_metadata(self, memorization_corpus):
        config = TrainConfig(iterations=3, learning_rate=0.4, l2=0.02, seed=7)
        model = train(memorization_corpus, train_config=config)
        meta = model.metadata
        assert meta["trained_on"] == "memo"
        assert meta["num_documents"] == 8
        assert meta["num_features"] == model.num_features()
        assert meta["learning_rate"] == 0.4
        assert meta["iterations"] == 3
        assert meta["l2"] == 0.02
        assert meta["seed"] == 7
        assert meta["fine_tuned_from"] is None

    def test_dev_history(self, memorization_corpus):
        model = train(
            memorization_corpus,
            dev=memorization_corpus,
            train_config=TrainConfig(iterations=10, dev_eval_interval=5),
        )
        history = model.metadata["dev_history"]
        assert [entry["iteration"] for entry in history] == [5, 10]
        for entry in history:
            assert 0.0 <= entry["micro_f1"] <= 1.0

    def test_empty_corpus_rejected(self, labels4):
        with pytest.raises(ValueError, match="no sentences"):
            train(Corpus("empty", labels4, ()))

    def test_predict_names_and_text(self, memorization_corpus):
        model = train(memorization_corpus, train_config=TrainConfig(iterations=30))
        preds = predict(model, memorization_corpus)
        assert preds.name == "memo-pred"
        assert preds.label_set == memorization_corpus.label_set
        for gold_doc, pred_doc in zip(memorization_corpus.documents, preds.documents):
            assert pred_doc.id == gold_doc.id
            assert pred_doc.text == gold_doc.text
            assert pred_doc.tokens == gold_doc.tokens

    def test_predict_label_set_mismatch(self, memorization_corpus, labels2, small_corpus):
        model = train(memorization_corpus, train_config=TrainConfig(iterations=1))
        with pytest.raises(ValueError, match="label set"):
            predict(model, small_corpus)


class TestFineTune:
    @pytest.fixture
    def base_model(self, small_corpus):
        return train(
            small_corpus,
            feature_config=FeatureConfig(window=1, affix_lengths=(1,)),
            train_config=TrainConfig(iterations=8),
        )

    @pytest.fixture
    def target_corpus(self, labels2) -> Corpus:
        pairs = [
            ("t1", "Core biopsy: grade 1 focus measuring 4 mm.",
             [("grade 1", "cancer_grade"), ("4 mm", "tumor_size")]),
            ("t2", "Specimen shows grade 2 disease, span 9 mm.",
             [("grade 2", "cancer_grade"), ("9 mm", "tumor_size")]),
        ]
        return corpus_from("target", pairs, labels2)

    def test_warm_start_preserves_base_rows(self, base_model, target_corpus):
        tuned = fine_tune(
            base_model, target_corpus, train_config=TrainConfig(iterations=0)
        )
        n_base = base_model.state_weights.shape[0]
        assert tuned.num_features() > n_base
        np.testing.assert_array_equal(
            tuned.state_weights[:n_base], base_model.state_weights
        )
        assert not tuned.state_weights[n_base:].any()
        np.testing.assert_array_equal(tuned.transitions, base_model.transitions)
        np.testing.assert_array_equal(tuned.start_weights, base_model.start_weights)
        np.testing.assert_array_equal(tuned.end_weights, base_model.end_weights)
        for name, index in base_model.feature_index.items():
            assert tuned.feature_index[name] == index

    def test_warm_start_metadata(self, base_model, target_corpus):
        tuned = fine_tune(
            base_model, target_corpus, train_config=TrainConfig(iterations=4)
        )
        meta = tuned.metadata
        assert meta["fine_tune_mode"] == "warm_start"
        assert meta["fine_tuned_from"] == "small"
        assert meta["trained_on"] == "target"
        assert meta["new_features"] == tuned.num_features() - base_model.num_features()
        assert meta["new_features"] > 0
        assert len(meta["objectives"]) == 4

    def test_warm_start_learns_target(self, base_model, target_corpus):
        tuned = fine_tune(
            base_model, target_corpus, train_config=TrainConfig(iterations=80)
        )
        report = evaluate(target_corpus, predict(tuned, target_corpus), "strict")
        assert report.micro.f1 >= 0.9

    def test_pooled_requires_base_corpus(self, base_model, target_corpus):
        with pytest.raises(ValueError, match="base_corpus"):
            fine_tune(base_model, target_corpus, pooled=True)

    def test_pooled_equals_scratch_train(
        self, base_model, target_corpus, small_corpus
    ):
        config = TrainConfig(iterations=12)
        pooled = fine_tune(
            base_model,
            target_corpus,
            train_config=config,
            pooled=True,
            base_corpus=small_corpus,
        )
        scratch = train(
            concat_corpora("small+target", small_corpus, target_corpus),
            feature_config=base_model.feature_config,
            train_config=config,
        )
        assert pooled.feature_index == scratch.feature_index
        np.testing.assert_array_equal(pooled.flat_weights(), scratch.flat_weights())
        assert pooled.metadata["fine_tune_mode"] == "pooled"
        assert pooled.metadata["fine_tuned_from"] == "small"

    def test_label_set_mismatch(self, base_model, memorization_corpus):
        with pytest.raises(ValueError, match="label-set mismatch"):
            fine_tune(base_model, memorization_corpus)


class TestModelIO:
    def test_round_trip(self, memorization_corpus, tmp_path):
        model = train(
            memorization_corpus,
            dev=memorization_corpus,
            train_config=TrainConfig(iterations=10, dev_eval_interval=5),
        )
        path = tmp_path / "model.json"
        model.save(path)
        loaded = CrfModel.load(path)
        assert loaded.labels == model.labels
        assert loaded.label_set == model.label_set
        assert loaded.feature_index == model.feature_index
        assert loaded.feature_config == model.feature_config
        assert loaded.metadata == model.metadata
        np.testing.assert_array_equal(loaded.flat_weights(), model.flat_weights())
        tokens = make_tokens(["grade", "2", "tumor"])
        assert viterbi(loaded, tokens) == viterbi(model, tokens)

    def test_rejects_wrong_format(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"format": "something-else"}), encoding="utf-8")
        with pytest.raises(ValueError, match="not a nerport-crf model file"):
            CrfModel.load(path)

    def test_rejects_wrong_version(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(
            json.dumps({"format": "nerport-crf", "version": 99}), encoding="utf-8"
        )
        with pytest.raises(ValueError, match="unsupported model version"):
            CrfModel.load(path)

    def test_set_flat_weights_shape_check(self, small_corpus):
        model = train(small_corpus, train_config=TrainConfig(iterations=1))
        with pytest.raises(ValueError, match="weights"):
            model.set_flat_weights(np.zeros(3))


class TestCrfTagger:
    def test_sklearn_params(self):
        tagger = CrfTagger(window=1, iterations=5)
        params = tagger.get_params()
        assert params["window"] == 1
        assert params["iterations"] == 5
        tagger.set_params(l2=0.2)
        assert tagger.l2 == 0.2

    def test_clone_keeps_params_drops_fit(self, memorization_corpus):
        tagger = CrfTagger(iterations=5).fit(memorization_corpus)
        copy = clone(tagger)
        assert copy.get_params() == tagger.get_params()
        with pytest.raises(RuntimeError, match="not fitted"):
            copy.predict(memorization_corpus)

    def test_fit_predict_score(self, memorization_corpus):
        tagger = CrfTagger(iterations=150)
        assert tagger.fit(memorization_corpus) is tagger
        preds = tagger.predict(memorization_corpus)
        assert preds.name == "memo-pred"
        score = tagger.score(memorization_corpus)
        expected = evaluate(memorization_corpus, preds, "strict").micro.f1
        assert score == expected
        assert score >= 0.95

    def test_matches_functional_train(self, memorization_corpus):
        tagger = CrfTagger(iterations=20).fit(memorization_corpus)
        model = train(memorization_corpus, train_config=TrainConfig(iterations=20))
        np.testing.assert_array_equal(
            tagger.model_.flat_weights(), model.flat_weights()
        )

    def test_warm_start_refit_fine_tunes(self, small_corpus, labels2):
        target = corpus_from(
            "t",
            [("t1", "Specimen grade 1, size 4 mm.",
              [("grade 1", "cancer_grade"), ("4 mm", "tumor_size")])],
            labels2,
        )
        tagger = CrfTagger(iterations=8).fit(small_corpus)
        base = tagger.model_
        tagger.set_params(warm_start=True, iterations=6)
        tagger.fit(target)
        assert tagger.model_.metadata["fine_tune_mode"] == "warm_start"
        expected = fine_tune(base, target, train_config=TrainConfig(iterations=6))
        np.testing.assert_array_equal(
            tagger.model_.flat_weights(), expected.flat_weights()
        )

    def test_unfitted_raises(self, memorization_corpus):
        tagger = CrfTagger()
        with pytest.raises(RuntimeError, match="not fitted"):
            tagger.predict(memorization_corpus)
        with pytest.raises(RuntimeError, match="not fitted"):
            tagger.score(memorization_corpus)

    def test_rejects_non_corpus(self):
        with pytest.raises(TypeError, match="must be a Corpus"):
            CrfTagger().fit([1, 2, 3])

    def test_save_and_reload(self, memorization_corpus, tmp_path):
        tagger = CrfTagger(iterations=30, window=1).fit(memorization_corpus)
        path = tmp_path / "tagger.json"
        tagger.save(path)
        restored = CrfTagger.from_model_file(path)
        assert restored.window == 1
        assert restored.iterations == 30
        np.testing.assert_array_equal(
            restored.model_.flat_weights(), tagger.model_.flat_weights()
        )
        original = tagger.predict(memorization_corpus)
        reloaded = restored.predict(memorization_corpus)
        for a, b in zip(original.documents, reloaded.documents):
            assert a.mentions == b.mentions
