"""Linear-chain CRF sequence tagger over BIO labels.

Scoring: a tag path y_1..y_T for a sentence scores
``start(y_1) + sum_t state(t, y_t) + sum_t transition(y_{t-1}, y_t)
+ end(y_T)`` where ``state(t, y) = sum_f w(f, y) * value(f)`` over the
features active at position t. Training maximizes the mean per-sentence
log-likelihood minus an L2 penalty ((lambda/2) * ||w||^2) by full-batch
gradient ascent with a constant learning rate; weights start at zero and
sentences contribute in corpus order, so training is deterministic and two
runs with the same inputs produce bit-identical models.

The partition function and marginals come from log-space forward-backward
with log-sum-exp; decoding is exact Viterbi with ties broken toward the
lowest label index (label order).

``CrfTagger`` wraps the functional API in a scikit-learn estimator
(``fit`` / ``predict`` / ``get_params`` / ``set_params``), with the sklearn
``warm_start`` convention mapping onto fine-tuning.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .corpus import (
    Corpus,
    Document,
    LabelSet,
    Token,
    bio_to_mentions,
    concat_corpora,
    mentions_to_bio,
)

logger = logging.getLogger(__name__)

MODEL_FORMAT = "nerport-crf"
MODEL_VERSION = 1

OUTSIDE = "O"


def bio_labels(label_set: LabelSet) -> tuple[str, ...]:
    """BIO tag list: O first, then B-/I- per category in label-set order."""
    labels = [OUTSIDE]
    for category in label_set:
        labels.append(f"B-{category}")
        labels.append(f"I-{category}")
    return tuple(labels)


@dataclass(frozen=True)
class FeatureConfig:
    """Feature extraction knobs.

    ``window`` is the context radius (0 disables neighbor features);
    ``affix_lengths`` the prefix/suffix lengths (empty disables affixes);
    ``shape_features`` toggles the shape string and digit/symbol flags.
    ``embeddings_path`` points at a text table of ``word v1 .. vd`` lines
    adding ``embedding_dim`` real-valued features per token (out-of-table
    words get the zero vector).
    """

    window: int = 2
    affix_lengths: tuple[int, ...] = (1, 2, 3)
    shape_features: bool = True
    embeddings_path: str | None = None
    embedding_dim: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "affix_lengths", tuple(self.affix_lengths))
        if self.window < 0:
            raise ValueError("window must be non-negative")
        if any(k < 1 for k in self.affix_lengths):
            raise ValueError("affix lengths must be positive")
        if self.embeddings_path is not None and self.embedding_dim < 1:
            raise ValueError("embedding_dim must be positive when embeddings_path is set")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.5
    iterations: int = 100
    l2: float = 0.01
    seed: int = 0
    dev_eval_interval: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")
        if self.dev_eval_interval < 0:
            raise ValueError("dev_eval_interval must be non-negative")


class EmbeddingTable:
    """Word -> vector lookup loaded from a ``word v1 .. vd`` text file."""

    def __init__(self, vectors: dict[str, np.ndarray], dim: int):
        self.vectors = vectors
        self.dim = dim
        self._zero = np.zeros(dim)

    @classmethod
    def load(cls, path: str | os.PathLike[str], dim: int) -> "EmbeddingTable":
        vectors: dict[str, np.ndarray] = {}
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                parts = line.split()
                if not parts:
                    continue
                if len(parts) != dim + 1:
                    raise ValueError(
                        f"{path}:{lineno}: expected a word and {dim} values, "
                        f"got {len(parts)} fields"
                    )
                vectors[parts[0]] = np.array([float(v) for v in parts[1:]])
        return cls(vectors, dim)

    def lookup(self, word: str) -> np.ndarray:
        return self.vectors.get(word, self._zero)


def token_shape(text: str) -> str:
    """Lowercase letters -> x, uppercase -> X, digits -> 9, others kept."""
    return "".join(
        "x" if c.islower() else "X" if c.isupper() else "9" if c.isdigit() else c
        for c in text
    )


def extract_features(
    tokens: Sequence[Token],
    position: int,
    config: FeatureConfig,
    embeddings: EmbeddingTable | None = None,
) -> list[tuple[str, float]]:
    """Named features with values for one token in its sentence.

    Discrete features have value 1.0; embedding features carry vector
    components. Window positions beyond the sentence emit ``<s>`` / ``</s>``
    sentinels. The bias feature is always present.
    """
    if not 0 <= position < len(tokens):
        raise ValueError(
            f"position {position} out of range for {len(tokens)} tokens"
        )
    text = tokens[position].text
    lower = text.lower()
    feats: list[tuple[str, float]] = [("bias", 1.0), (f"w={lower}", 1.0)]
    if config.shape_features:
        feats.append((f"shape={token_shape(text)}", 1.0))
        if text.isdigit():
            feats.append(("isdigit", 1.0))
        if text and all(not c.isalnum() for c in text):
            feats.append(("issymbol", 1.0))
    for k in config.affix_lengths:
        if len(lower) >= k:
            feats.append((f"pre{k}={lower[:k]}", 1.0))
            feats.append((f"suf{k}={lower[-k:]}", 1.0))
    for offset in range(-config.window, config.window + 1):
        if offset == 0:
            continue
        j = position + offset
        if j < 0:
            neighbor = "<s>"
        elif j >= len(tokens):
            neighbor = "</s>"
        else:
            neighbor = tokens[j].text.lower()
        feats.append((f"w[{offset:+d}]={neighbor}", 1.0))
    if embeddings is not None:
        vector = embeddings.lookup(lower)
        for j in range(embeddings.dim):
            feats.append((f"emb{j}", float(vector[j])))
    return feats


class _Featurizer:
    """FeatureConfig plus its embedding table, loaded once."""

    def __init__(self, config: FeatureConfig):
        self.config = config
        self.embeddings = (
            EmbeddingTable.load(config.embeddings_path, config.embedding_dim)
            if config.embeddings_path is not None
            else None
        )

    def __call__(
        self, tokens: Sequence[Token], position: int
    ) -> list[tuple[str, float]]:
        return extract_features(tokens, position, self.config, self.embeddings)


@dataclass
class CrfModel:
    """Trained tagger parameters.

    ``state_weights`` has shape (num features, num labels); ``transitions``
    (num labels, num labels) indexed [previous, current]; ``start_weights``
    and ``end_weights`` score the first and last tag of a sentence. Treat a
    trained model as immutable; the flat-weight helpers exist for numerical
    analysis.
    """

    label_set: LabelSet
    labels: tuple[str, ...]
    feature_index: dict[str, int]
    state_weights: np.ndarray
    transitions: np.ndarray
    start_weights: np.ndarray
    end_weights: np.ndarray
    feature_config: FeatureConfig
    metadata: dict = field(default_factory=dict)
    _featurizer: _Featurizer | None = field(
        default=None, repr=False, compare=False
    )

    def featurizer(self) -> _Featurizer:
        if self._featurizer is None:
            self._featurizer = _Featurizer(self.feature_config)
        return self._featurizer

    def num_features(self) -> int:
        return len(self.feature_index)

    def flat_weights(self) -> np.ndarray:
        """All weights as one vector: state, transitions, start, end."""
        return np.concatenate(
            [
                self.state_weights.ravel(),
                self.transitions.ravel(),
                self.start_weights,
                self.end_weights,
            ]
        )

    def set_flat_weights(self, vector: np.ndarray) -> None:
        f, l = self.state_weights.shape
        expected = f * l + l * l + 2 * l
        if vector.shape != (expected,):
            raise ValueError(f"expected {expected} weights, got {vector.shape}")
        split1 = f * l
        split2 = split1 + l * l
        split3 = split2 + l
        self.state_weights = vector[:split1].reshape(f, l).copy()
        self.transitions = vector[split1:split2].reshape(l, l).copy()
        self.start_weights = vector[split2:split3].copy()
        self.end_weights = vector[split3:].copy()

    def save(self, path: str | os.PathLike[str]) -> None:
        record = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "categories": list(self.label_set.categories),
            "labels": list(self.labels),
            "feature_config": {
                "window": self.feature_config.window,
                "affix_lengths": list(self.feature_config.affix_lengths),
                "shape_features": self.feature_config.shape_features,
                "embeddings_path": self.feature_config.embeddings_path,
                "embedding_dim": self.feature_config.embedding_dim,
            },
            "features": self.feature_index,
            "state_weights": [list(row) for row in self.state_weights],
            "transitions": [list(row) for row in self.transitions],
            "start_weights": list(self.start_weights),
            "end_weights": list(self.end_weights),
            "metadata": self.metadata,
        }
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(record, handle, ensure_ascii=False)
            handle.write("\n")

    @classmethod
    def load(cls, path: str | os.PathLike[str]) -> "CrfModel":
        with open(path, encoding="utf-8") as handle:
            record = json.load(handle)
        if record.get("format") != MODEL_FORMAT:
            raise ValueError(f"{path}: not a {MODEL_FORMAT} model file")
        if record.get("version") != MODEL_VERSION:
            raise ValueError(
                f"{path}: unsupported model version {record.get('version')!r}"
            )
        config = FeatureConfig(
            window=record["feature_config"]["window"],
            affix_lengths=tuple(record["feature_config"]["affix_lengths"]),
            shape_features=record["feature_config"]["shape_features"],
            embeddings_path=record["feature_config"]["embeddings_path"],
            embedding_dim=record["feature_config"]["embedding_dim"],
        )
        return cls(
            label_set=LabelSet(tuple(record["categories"])),
            labels=tuple(record["labels"]),
            feature_index=dict(record["features"]),
            state_weights=np.array(record["state_weights"], dtype=float),
            transitions=np.array(record["transitions"], dtype=float),
            start_weights=np.array(record["start_weights"], dtype=float),
            end_weights=np.array(record["end_weights"], dtype=float),
            feature_config=config,
            metadata=dict(record.get("metadata", {})),
        )


def log_sum_exp(values: np.ndarray, axis: int | None = None):
    """Numerically stable log(sum(exp(values))) along ``axis``."""
    values = np.asarray(values, dtype=float)
    highest = np.max(values, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(values - highest), axis=axis, keepdims=True)) + highest
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def forward_backward(
    state_scores: np.ndarray,
    transitions: np.ndarray,
    start_weights: np.ndarray,
    end_weights: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Log partition function and exact marginals for one sentence.

    Returns ``(log_z, node, edge)`` where ``node[t, y]`` is P(y at t) and
    ``edge[t, y, y']`` is P(y at t and y' at t+1); ``edge`` is empty for a
    one-token sentence. Node marginals sum to 1 per position and edge
    marginals are consistent with them by construction of the recursions.
    """
    n_tokens, n_labels = state_scores.shape
    alpha = np.empty((n_tokens, n_labels))
    alpha[0] = start_weights + state_scores[0]
    for t in range(1, n_tokens):
        alpha[t] = state_scores[t] + log_sum_exp(
            alpha[t - 1][:, None] + transitions, axis=0
        )
    log_z = float(log_sum_exp(alpha[-1] + end_weights))
    beta = np.empty((n_tokens, n_labels))
    beta[-1] = end_weights
    for t in range(n_tokens - 2, -1, -1):
        beta[t] = log_sum_exp(
            transitions + (state_scores[t + 1] + beta[t + 1])[None, :], axis=1
        )
    node = np.exp(alpha + beta - log_z)
    edge = np.empty((n_tokens - 1, n_labels, n_labels))
    for t in range(n_tokens - 1):
        edge[t] = np.exp(
            alpha[t][:, None]
            + transitions
            + (state_scores[t + 1] + beta[t + 1])[None, :]
            - log_z
        )
    return log_z, node, edge


@dataclass
class _Encoded:
    """One sentence, features resolved against a feature dictionary."""

    feat_idx: np.ndarray  # (K,) feature indices, grouped by position
    feat_val: np.ndarray  # (K,) feature values
    feat_pos: np.ndarray  # (K,) position of each feature
    tags: np.ndarray  # (T,) gold label indices
    length: int


@dataclass
class _Weights:
    state: np.ndarray
    transitions: np.ndarray
    start: np.ndarray
    end: np.ndarray

    def squared_norm(self) -> float:
        return float(
            np.sum(self.state**2)
            + np.sum(self.transitions**2)
            + np.sum(self.start**2)
            + np.sum(self.end**2)
        )


def _encode_corpus(
    data: Corpus,
    featurizer: _Featurizer,
    feature_index: dict[str, int],
    label_index: Mapping[str, int],
    *,
    grow: bool,
) -> list[_Encoded]:
    instances: list[_Encoded] = []
    for doc in data.documents:
        tags = mentions_to_bio(doc)
        for start, end in doc.sentences:
            sent_tokens = doc.tokens[start:end]
            idxs: list[int] = []
            vals: list[float] = []
            poss: list[int] = []
            for i in range(len(sent_tokens)):
                for name, value in featurizer(sent_tokens, i):
                    fi = feature_index.get(name)
                    if fi is None:
                        if not grow:
                            continue
                        fi = len(feature_index)
                        feature_index[name] = fi
                    idxs.append(fi)
                    vals.append(value)
                    poss.append(i)
            instances.append(
                _Encoded(
                    feat_idx=np.array(idxs, dtype=np.int64),
                    feat_val=np.array(vals, dtype=float),
                    feat_pos=np.array(poss, dtype=np.int64),
                    tags=np.array(
                        [label_index[tags[i]] for i in range(start, end)],
                        dtype=np.int64,
                    ),
                    length=len(sent_tokens),
                )
            )
    return instances


def _state_score_table(
    weights_state: np.ndarray, inst: _Encoded, n_labels: int
) -> np.ndarray:
    scores = np.zeros((inst.length, n_labels))
    if inst.feat_idx.size:
        np.add.at(
            scores,
            inst.feat_pos,
            weights_state[inst.feat_idx] * inst.feat_val[:, None],
        )
    return scores


def _objective_and_gradient(
    weights: _Weights, instances: Sequence[_Encoded], l2: float
) -> tuple[float, _Weights]:
    """Mean per-sentence regularized log-likelihood and its gradient
    (empirical minus expected feature counts, minus the L2 term)."""
    n_labels = weights.transitions.shape[0]
    g_state = np.zeros_like(weights.state)
    g_trans = np.zeros_like(weights.transitions)
    g_start = np.zeros_like(weights.start)
    g_end = np.zeros_like(weights.end)
    total = 0.0
    for inst in instances:
        scores = _state_score_table(weights.state, inst, n_labels)
        log_z, node, edge = forward_backward(
            scores, weights.transitions, weights.start, weights.end
        )
        t_range = np.arange(inst.length)
        gold = (
            float(weights.start[inst.tags[0]])
            + float(scores[t_range, inst.tags].sum())
            + float(weights.end[inst.tags[-1]])
        )
        if inst.length > 1:
            gold += float(
                weights.transitions[inst.tags[:-1], inst.tags[1:]].sum()
            )
        total += gold - log_z
        residual = -node
        residual[t_range, inst.tags] += 1.0
        if inst.feat_idx.size:
            np.add.at(
                g_state,
                inst.feat_idx,
                inst.feat_val[:, None] * residual[inst.feat_pos],
            )
        g_start += residual[0]
        g_end += residual[inst.length - 1]
        if inst.length > 1:
            g_trans -= edge.sum(axis=0)
            np.add.at(g_trans, (inst.tags[:-1], inst.tags[1:]), 1.0)
    count = len(instances)
    value = total / count - l2 / 2.0 * weights.squared_norm()
    gradient = _Weights(
        state=g_state / count - l2 * weights.state,
        transitions=g_trans / count - l2 * weights.transitions,
        start=g_start / count - l2 * weights.start,
        end=g_end / count - l2 * weights.end,
    )
    return value, gradient


def objective_and_gradient(
    model: CrfModel, data: Corpus, l2: float
) -> tuple[float, dict[str, np.ndarray]]:
    """Training objective and gradient of ``model`` on ``data``.

    Features unknown to the model's dictionary are ignored, matching
    prediction-time behavior. The gradient keys mirror the weight arrays.
    """
    label_index = {label: i for i, label in enumerate(model.labels)}
    instances = _encode_corpus(
        data, model.featurizer(), dict(model.feature_index), label_index, grow=False
    )
    if not instances:
        raise ValueError(f"corpus {data.name!r} has no sentences")
    weights = _Weights(
        model.state_weights, model.transitions, model.start_weights, model.end_weights
    )
    value, gradient = _objective_and_gradient(weights, instances, l2)
    return value, {
        "state_weights": gradient.state,
        "transitions": gradient.transitions,
        "start_weights": gradient.start,
        "end_weights": gradient.end,
    }


def flatten_gradient(gradient: Mapping[str, np.ndarray]) -> np.ndarray:
    """Gradient dict -> flat vector, same layout as ``flat_weights``."""
    return np.concatenate(
        [
            gradient["state_weights"].ravel(),
            gradient["transitions"].ravel(),
            gradient["start_weights"],
            gradient["end_weights"],
        ]
    )


def _evaluate_dev(
    weights: _Weights,
    model_template: CrfModel,
    dev: Corpus,
) -> float:
    from .evaluation import evaluate  # local import avoids a cycle at import time

    snapshot = CrfModel(
        label_set=model_template.label_set,
        labels=model_template.labels,
        feature_index=model_template.feature_index,
        state_weights=weights.state,
        transitions=weights.transitions,
        start_weights=weights.start,
        end_weights=weights.end,
        feature_config=model_template.feature_config,
        metadata={},
        _featurizer=model_template._featurizer,
    )
    return evaluate(dev, predict(snapshot, dev), "strict").micro.f1


def _ascend(
    weights: _Weights,
    instances: Sequence[_Encoded],
    config: TrainConfig,
    *,
    dev: Corpus | None,
    model_template: CrfModel,
) -> tuple[list[float], list[dict]]:
    objectives: list[float] = []
    dev_history: list[dict] = []
    for iteration in range(1, config.iterations + 1):
        value, gradient = _objective_and_gradient(weights, instances, config.l2)
        weights.state += config.learning_rate * gradient.state
        weights.transitions += config.learning_rate * gradient.transitions
        weights.start += config.learning_rate * gradient.start
        weights.end += config.learning_rate * gradient.end
        objectives.append(value)
        if (
            dev is not None
            and config.dev_eval_interval
            and iteration % config.dev_eval_interval == 0
        ):
            f1 = _evaluate_dev(weights, model_template, dev)
            dev_history.append({"iteration": iteration, "micro_f1": f1})
            logger.info(
                "iteration %d: objective %.6f, dev strict micro-F1 %.4f",
                iteration,
                value,
                f1,
            )
    return objectives, dev_history


def train(
    data: Corpus,
    dev: Corpus | None = None,
    *,
    feature_config: FeatureConfig | None = None,
    train_config: TrainConfig | None = None,
) -> CrfModel:
    """Train a CRF from scratch on ``data``.

    ``dev`` is only used for periodic strict micro-F1 reporting when the
    train config sets ``dev_eval_interval``. Raises on a corpus with no
    sentences. Deterministic: identical inputs give identical models.
    """
    feature_config = feature_config or FeatureConfig()
    train_config = train_config or TrainConfig()
    labels = bio_labels(data.label_set)
    label_index = {label: i for i, label in enumerate(labels)}
    featurizer = _Featurizer(feature_config)
    feature_index: dict[str, int] = {}
    instances = _encode_corpus(
        data, featurizer, feature_index, label_index, grow=True
    )
    if not instances:
        raise ValueError(f"training corpus {data.name!r} has no sentences")
    n_labels = len(labels)
    weights = _Weights(
        state=np.zeros((len(feature_index), n_labels)),
        transitions=np.zeros((n_labels, n_labels)),
        start=np.zeros(n_labels),
        end=np.zeros(n_labels),
    )
    model = CrfModel(
        label_set=data.label_set,
        labels=labels,
        feature_index=feature_index,
        state_weights=weights.state,
        transitions=weights.transitions,
        start_weights=weights.start,
        end_weights=weights.end,
        feature_config=feature_config,
        metadata={},
        _featurizer=featurizer,
    )
    objectives, dev_history = _ascend(
        weights, instances, train_config, dev=dev, model_template=model
    )
    model.state_weights = weights.state
    model.transitions = weights.transitions
    model.start_weights = weights.start
    model.end_weights = weights.end
    model.metadata = {
        "trained_on": data.name,
        "num_documents": len(data.documents),
        "num_sentences": len(instances),
        "num_features": len(feature_index),
        "learning_rate": train_config.learning_rate,
        "iterations": train_config.iterations,
        "l2": train_config.l2,
        "seed": train_config.seed,
        "final_objective": objectives[-1] if objectives else None,
        "objectives": objectives,
        "dev_history": dev_history,
        "fine_tuned_from": None,
    }
    return model


def fine_tune(
    base: CrfModel,
    data: Corpus,
    dev: Corpus | None = None,
    *,
    train_config: TrainConfig | None = None,
    pooled: bool = False,
    base_corpus: Corpus | None = None,
) -> CrfModel:
    """Continue training ``base`` on ``data`` (warm start).

    The feature dictionary grows with features unseen by the base model; base
    weights keep their indices and new features start at zero. With
    ``pooled=True`` the model is instead retrained from scratch on
    ``base_corpus`` + ``data`` (the alternative refinement procedure), which
    requires passing the base training corpus.
    """
    train_config = train_config or TrainConfig()
    if data.label_set != base.label_set:
        raise ValueError(
            "label-set mismatch between the base model and the fine-tuning corpus"
        )
    if pooled:
        if base_corpus is None:
            raise ValueError("pooled retraining requires base_corpus")
        model = train(
            concat_corpora(f"{base_corpus.name}+{data.name}", base_corpus, data),
            dev,
            feature_config=base.feature_config,
            train_config=train_config,
        )
        model.metadata["fine_tuned_from"] = base.metadata.get("trained_on")
        model.metadata["fine_tune_mode"] = "pooled"
        return model
    label_index = {label: i for i, label in enumerate(base.labels)}
    featurizer = base.featurizer()
    feature_index = dict(base.feature_index)
    instances = _encode_corpus(
        data, featurizer, feature_index, label_index, grow=True
    )
    if not instances:
        raise ValueError(f"fine-tuning corpus {data.name!r} has no sentences")
    n_labels = len(base.labels)
    state = np.zeros((len(feature_index), n_labels))
    state[: base.state_weights.shape[0]] = base.state_weights
    weights = _Weights(
        state=state,
        transitions=base.transitions.copy(),
        start=base.start_weights.copy(),
        end=base.end_weights.copy(),
    )
    model = CrfModel(
        label_set=base.label_set,
        labels=base.labels,
        feature_index=feature_index,
        state_weights=weights.state,
        transitions=weights.transitions,
        start_weights=weights.start,
        end_weights=weights.end,
        feature_config=base.feature_config,
        metadata={},
        _featurizer=featurizer,
    )
    objectives, dev_history = _ascend(
        weights, instances, train_config, dev=dev, model_template=model
    )
    model.state_weights = weights.state
    model.transitions = weights.transitions
    model.start_weights = weights.start
    model.end_weights = weights.end
    model.metadata = {
        "trained_on": data.name,
        "num_documents": len(data.documents),
        "num_sentences": len(instances),
        "num_features": len(feature_index),
        "new_features": len(feature_index) - base.state_weights.shape[0],
        "learning_rate": train_config.learning_rate,
        "iterations": train_config.iterations,
        "l2": train_config.l2,
        "seed": train_config.seed,
        "final_objective": objectives[-1] if objectives else None,
        "objectives": objectives,
        "dev_history": dev_history,
        "fine_tuned_from": base.metadata.get("trained_on"),
        "fine_tune_mode": "warm_start",
    }
    return model


def sequence_log_potentials(
    model: CrfModel, tokens: Sequence[Token]
) -> np.ndarray:
    """Per-position state score table (num tokens, num labels).

    Combine with ``model.transitions`` / ``start_weights`` / ``end_weights``
    for full path scores. Features missing from the dictionary contribute 0.
    """
    featurizer = model.featurizer()
    scores = np.zeros((len(tokens), len(model.labels)))
    for i in range(len(tokens)):
        for name, value in featurizer(tokens, i):
            fi = model.feature_index.get(name)
            if fi is not None:
                scores[i] += model.state_weights[fi] * value
    return scores


def _viterbi_from_scores(
    scores: np.ndarray,
    transitions: np.ndarray,
    start_weights: np.ndarray,
    end_weights: np.ndarray,
) -> list[int]:
    n_tokens, n_labels = scores.shape
    delta = start_weights + scores[0]
    back = np.zeros((n_tokens, n_labels), dtype=np.int64)
    for t in range(1, n_tokens):
        candidates = delta[:, None] + transitions
        back[t] = np.argmax(candidates, axis=0)  # first max: lowest label wins ties
        delta = candidates[back[t], np.arange(n_labels)] + scores[t]
    delta = delta + end_weights
    best = int(np.argmax(delta))
    path = [best]
    for t in range(n_tokens - 1, 0, -1):
        best = int(back[t, best])
        path.append(best)
    path.reverse()
    return path


def viterbi(model: CrfModel, tokens: Sequence[Token]) -> tuple[str, ...]:
    """Highest-scoring tag sequence for one sentence (exact decoding)."""
    if not tokens:
        return ()
    scores = sequence_log_potentials(model, tokens)
    path = _viterbi_from_scores(
        scores, model.transitions, model.start_weights, model.end_weights
    )
    return tuple(model.labels[i] for i in path)


def predict(model: CrfModel, corpus: Corpus) -> Corpus:
    """Decode every sentence of ``corpus`` into a prediction corpus.

    Input documents keep their text, tokens and sentences; gold mentions are
    ignored and replaced by decoded ones. The corpus must use the model's
    label set and the same tokenization rules as training (guaranteed for
    corpora built by this package).
    """
    if corpus.label_set != model.label_set:
        raise ValueError("corpus label set does not match the model's")
    docs = []
    for doc in corpus.documents:
        tags: list[str] = []
        for sent_tokens in doc.sentence_tokens():
            tags.extend(viterbi(model, sent_tokens))
        mentions = bio_to_mentions(
            tags, doc.tokens, doc_id=doc.id, text=doc.text
        )
        docs.append(
            Document(doc.id, doc.doc_type, doc.text, doc.tokens, doc.sentences, mentions)
        )
    return Corpus(f"{corpus.name}-pred", corpus.label_set, tuple(docs))


def _check_corpus(value: object, name: str = "corpus") -> Corpus:
    if not isinstance(value, Corpus):
        raise TypeError(f"{name} must be a Corpus, got {type(value).__name__}")
    return value


class CrfTagger(BaseEstimator):
    """scikit-learn style estimator facade over the CRF.

    ``fit(corpus, dev=None)`` trains from scratch, or continues from the
    previous fit when ``warm_start`` is set (fine-tuning: the feature
    dictionary grows, existing weights are kept). ``predict(corpus)`` returns
    a prediction corpus; ``score(corpus)`` its strict micro-F1 against the
    corpus's own gold mentions.
    """

    def __init__(
        self,
        *,
        window: int = 2,
        affix_lengths: tuple[int, ...] = (1, 2, 3),
        shape_features: bool = True,
        embeddings_path: str | None = None,
        embedding_dim: int = 0,
        learning_rate: float = 0.5,
        iterations: int = 100,
        l2: float = 0.01,
        seed: int = 0,
        dev_eval_interval: int = 0,
        warm_start: bool = False,
    ):
        self.window = window
        self.affix_lengths = affix_lengths
        self.shape_features = shape_features
        self.embeddings_path = embeddings_path
        self.embedding_dim = embedding_dim
        self.learning_rate = learning_rate
        self.iterations = iterations
        self.l2 = l2
        self.seed = seed
        self.dev_eval_interval = dev_eval_interval
        self.warm_start = warm_start

    def _feature_config(self) -> FeatureConfig:
        return FeatureConfig(
            window=self.window,
            affix_lengths=tuple(self.affix_lengths),
            shape_features=self.shape_features,
            embeddings_path=self.embeddings_path,
            embedding_dim=self.embedding_dim,
        )

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            iterations=self.iterations,
            l2=self.l2,
            seed=self.seed,
            dev_eval_interval=self.dev_eval_interval,
        )

    def fit(self, corpus: Corpus, dev: Corpus | None = None) -> "CrfTagger":
        _check_corpus(corpus)
        if dev is not None:
            _check_corpus(dev, "dev")
        if self.warm_start and hasattr(self, "model_"):
            self.model_ = fine_tune(
                self.model_, corpus, dev, train_config=self._train_config()
            )
        else:
            self.model_ = train(
                corpus,
                dev,
                feature_config=self._feature_config(),
                train_config=self._train_config(),
            )
        return self

    def predict(self, corpus: Corpus) -> Corpus:
        self._check_fitted()
        _check_corpus(corpus)
        return predict(self.model_, corpus)

    def score(self, corpus: Corpus) -> float:
        from .evaluation import evaluate

        self._check_fitted()
        _check_corpus(corpus)
        return evaluate(corpus, predict(self.model_, corpus), "strict").micro.f1

    def save(self, path: str | os.PathLike[str]) -> None:
        self._check_fitted()
        self.model_.save(path)

    @classmethod
    def from_model(cls, model: CrfModel) -> "CrfTagger":
        config = model.feature_config
        meta = model.metadata
        tagger = cls(
            window=config.window,
            affix_lengths=config.affix_lengths,
            shape_features=config.shape_features,
            embeddings_path=config.embeddings_path,
            embedding_dim=config.embedding_dim,
            learning_rate=meta.get("learning_rate", 0.5),
            iterations=meta.get("iterations", 100),
            l2=meta.get("l2", 0.01),
            seed=meta.get("seed", 0),
        )
        tagger.model_ = model
        return tagger

    @classmethod
    def from_model_file(cls, path: str | os.PathLike[str]) -> "CrfTagger":
        return cls.from_model(CrfModel.load(path))

    def _check_fitted(self) -> None:
        if not hasattr(self, "model_"):
            raise RuntimeError(
                "this CrfTagger instance is not fitted yet; call fit first"
            )
