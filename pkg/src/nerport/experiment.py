"""Cross-site transfer experiments: seeded splits, the three training
strategies, run aggregation with significance tests, similarity-vs-drop
correlation, and permutation analyses.

Strategies, all evaluated on site B's test split:

* ``direct_transfer`` - train on site A's train+dev documents
* ``fine_tune``       - warm-start from that model, continue on B train+dev
* ``local_train``     - train from scratch on B train+dev

The site A model is also scored on A's own test split ("home_baseline").
Per-run seeds are ``base + run_index``; independent seed streams are derived
with :func:`derive_seed` (SHA-256 of base and labels, truncated to 32 bits)
so any single component can be replayed in isolation. Reports contain no
timestamps: rerunning a config byte-identically reproduces every file.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .corpus import Corpus, CorpusError, LabelSet, concat_corpora, load_corpus
from .crf import CrfModel, FeatureConfig, TrainConfig, fine_tune, predict, train
from .evaluation import EvalReport, evaluate
from .perturbation import build_donor_pool, permute_test_set
from .similarity import SimilarityReport, similarity_report
from .stats import AnovaResult, RunAggregate, aggregate_runs, one_way_anova, pearson

STRATEGIES: tuple[str, ...] = ("direct_transfer", "fine_tune", "local_train")
HOME_BASELINE = "home_baseline"

SIGNIFICANCE_LEVEL = 0.05


def derive_seed(base: int, *parts: object) -> int:
    """Stable 32-bit seed from a base seed and component labels (SHA-256)."""
    key = "|".join([str(int(base))] + [str(p) for p in parts])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


def split_corpus(
    corpus: Corpus,
    ratios: tuple[float, float, float] = (0.6, 0.1, 0.3),
    seed: int = 0,
) -> tuple[Corpus, Corpus, Corpus]:
    """Document-level train/dev/test split.

    Documents are shuffled with a seeded PCG64 permutation and partitioned
    contiguously; dev and test sizes are floored, the remainder goes to
    train. Every split must end up non-empty.
    """
    if len(ratios) != 3:
        raise ValueError("ratios must have three entries (train, dev, test)")
    if any(r <= 0 for r in ratios):
        raise ValueError("all split ratios must be positive")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {sum(ratios)!r}")
    n = len(corpus.documents)
    n_dev = int(math.floor(ratios[1] * n + 1e-9))
    n_test = int(math.floor(ratios[2] * n + 1e-9))
    n_train = n - n_dev - n_test
    if min(n_train, n_dev, n_test) < 1:
        raise ValueError(
            f"corpus {corpus.name!r} has too few documents ({n}) for "
            f"split ratios {ratios}"
        )
    order = np.random.default_rng(seed).permutation(n)
    docs = corpus.documents
    train_docs = tuple(docs[i] for i in order[:n_train])
    dev_docs = tuple(docs[i] for i in order[n_train : n_train + n_dev])
    test_docs = tuple(docs[i] for i in order[n_train + n_dev :])
    return (
        Corpus(f"{corpus.name}:train", corpus.label_set, train_docs),
        Corpus(f"{corpus.name}:dev", corpus.label_set, dev_docs),
        Corpus(f"{corpus.name}:test", corpus.label_set, test_docs),
    )


def import_predictions(
    path: str | os.PathLike[str], gold: Corpus, *, name: str | None = None
) -> Corpus:
    """Load an externally produced prediction corpus against ``gold``.

    Overlapping mentions are allowed; unknown labels and document ids absent
    from gold are errors. Missing documents are fine (scored as all-miss).
    """
    pred = load_corpus(path, gold.label_set, name=name, allow_overlap=True)
    gold_ids = {doc.id for doc in gold.documents}
    for doc in pred.documents:
        if doc.id not in gold_ids:
            raise CorpusError(
                f"prediction document id {doc.id!r} does not occur in the gold corpus"
            )
    return pred


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a transfer experiment needs; JSON round-trippable."""

    site_a: str = ""
    site_b: str = ""
    labels: tuple[str, ...] | None = None
    ratios: tuple[float, float, float] = (0.6, 0.1, 0.3)
    runs: int = 10
    seed: int = 0
    modes: tuple[str, ...] = ("strict", "lenient")
    strategies: tuple[str, ...] = STRATEGIES
    idf_variant: str = "paper"
    output_dir: str = "experiment-out"
    feature: FeatureConfig = field(default_factory=FeatureConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    finetune: TrainConfig = field(default_factory=lambda: TrainConfig(iterations=50))

    def __post_init__(self) -> None:
        object.__setattr__(self, "ratios", tuple(self.ratios))
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        for strategy in self.strategies:
            if strategy not in STRATEGIES:
                raise ValueError(f"unknown strategy {strategy!r}")

    def label_set(self) -> LabelSet:
        return LabelSet(self.labels) if self.labels else LabelSet.default()

    @classmethod
    def from_mapping(cls, data: Mapping[str, object]) -> "ExperimentConfig":
        known = {
            "site_a", "site_b", "labels", "ratios", "runs", "seed", "modes",
            "strategies", "idf_variant", "output_dir", "feature", "train",
            "finetune",
        }
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        kwargs: dict = {k: v for k, v in data.items() if k not in ("feature", "train", "finetune")}
        if "labels" in kwargs and kwargs["labels"] is not None:
            kwargs["labels"] = tuple(kwargs["labels"])
        if "ratios" in kwargs:
            kwargs["ratios"] = tuple(kwargs["ratios"])
        if "modes" in kwargs:
            kwargs["modes"] = tuple(kwargs["modes"])
        if "strategies" in kwargs:
            kwargs["strategies"] = tuple(kwargs["strategies"])
        if "feature" in data:
            fc = dict(data["feature"])
            if "affix_lengths" in fc:
                fc["affix_lengths"] = tuple(fc["affix_lengths"])
            kwargs["feature"] = FeatureConfig(**fc)
        if "train" in data:
            kwargs["train"] = TrainConfig(**dict(data["train"]))
        if "finetune" in data:
            kwargs["finetune"] = TrainConfig(**dict(data["finetune"]))
        return cls(**kwargs)

    def to_mapping(self) -> dict:
        return {
            "site_a": self.site_a,
            "site_b": self.site_b,
            "labels": list(self.labels) if self.labels else None,
            "ratios": list(self.ratios),
            "runs": self.runs,
            "seed": self.seed,
            "modes": list(self.modes),
            "strategies": list(self.strategies),
            "idf_variant": self.idf_variant,
            "output_dir": self.output_dir,
            "feature": {
                "window": self.feature.window,
                "affix_lengths": list(self.feature.affix_lengths),
                "shape_features": self.feature.shape_features,
                "embeddings_path": self.feature.embeddings_path,
                "embedding_dim": self.feature.embedding_dim,
            },
            "train": _train_config_mapping(self.train),
            "finetune": _train_config_mapping(self.finetune),
        }


def _train_config_mapping(config: TrainConfig) -> dict:
    return {
        "learning_rate": config.learning_rate,
        "iterations": config.iterations,
        "l2": config.l2,
        "seed": config.seed,
        "dev_eval_interval": config.dev_eval_interval,
    }


@dataclass(frozen=True)
class RunResult:
    run: int
    seed: int
    reports: Mapping[str, Mapping[str, EvalReport]]  # strategy -> mode -> report
    home: Mapping[str, EvalReport]  # mode -> report on site A's test split


@dataclass(frozen=True)
class PairwiseResult:
    best: str
    other: str
    anova: AnovaResult
    significant: bool


@dataclass(frozen=True)
class CorrelationResult:
    r: float | None
    categories: tuple[str, ...]
    similarities: tuple[float, ...]
    home_f1: tuple[float, ...]
    direct_f1: tuple[float, ...]
    drops: tuple[float, ...]
    note: str = ""


@dataclass(frozen=True)
class TransferReport:
    config: ExperimentConfig
    label_set: LabelSet
    runs: tuple[RunResult, ...]
    aggregates: Mapping[str, Mapping[str, Mapping[str, RunAggregate]]]
    anova: Mapping[str, AnovaResult | None]
    pairwise: Mapping[str, tuple[PairwiseResult, ...]]
    correlation: Mapping[str, CorrelationResult | None]
    similarity: SimilarityReport
    warnings: tuple[str, ...]


def _train_strategies(
    config: ExperimentConfig,
    run_index: int,
    site_a: Corpus,
    site_b: Corpus,
) -> RunResult:
    run_seed = config.seed + run_index
    a_train, a_dev, a_test = split_corpus(
        site_a, config.ratios, derive_seed(run_seed, "split", "a")
    )
    b_train, b_dev, b_test = split_corpus(
        site_b, config.ratios, derive_seed(run_seed, "split", "b")
    )
    # Per the protocol, training pools are train+dev; dev has no separate
    # early-stopping role in full-batch training.
    pool_a = concat_corpora(f"{site_a.name}:pool", a_train, a_dev)
    pool_b = concat_corpora(f"{site_b.name}:pool", b_train, b_dev)
    base_model = train(
        pool_a,
        feature_config=config.feature,
        train_config=replace(config.train, seed=derive_seed(run_seed, "train", "a")),
    )
    predictions: dict[str, Corpus] = {}
    for strategy in config.strategies:
        if strategy == "direct_transfer":
            predictions[strategy] = predict(base_model, b_test)
        elif strategy == "fine_tune":
            tuned = fine_tune(
                base_model,
                pool_b,
                train_config=replace(
                    config.finetune, seed=derive_seed(run_seed, "finetune", "b")
                ),
            )
            predictions[strategy] = predict(tuned, b_test)
        elif strategy == "local_train":
            local = train(
                pool_b,
                feature_config=config.feature,
                train_config=replace(
                    config.train, seed=derive_seed(run_seed, "train", "b")
                ),
            )
            predictions[strategy] = predict(local, b_test)
    reports = {
        strategy: {
            mode: evaluate(b_test, predictions[strategy], mode)
            for mode in config.modes
        }
        for strategy in config.strategies
    }
    home_pred = predict(base_model, a_test)
    home = {mode: evaluate(a_test, home_pred, mode) for mode in config.modes}
    return RunResult(run=run_index, seed=run_seed, reports=reports, home=home)


def run_transfer_experiment(
    config: ExperimentConfig,
    site_a: Corpus | None = None,
    site_b: Corpus | None = None,
) -> TransferReport:
    """Run the full transfer protocol and aggregate across runs.

    Corpora are loaded from the config paths unless passed in directly.
    """
    label_set = config.label_set()
    if site_a is None:
        site_a = load_corpus(config.site_a, label_set, name="site_a")
    if site_b is None:
        site_b = load_corpus(config.site_b, label_set, name="site_b")
    if site_a.label_set != site_b.label_set:
        raise ValueError("site corpora must share a label set")
    label_set = site_a.label_set
    warnings: list[str] = []
    runs = tuple(
        _train_strategies(config, r, site_a, site_b) for r in range(config.runs)
    )
    similarity = similarity_report(site_a, site_b, config.idf_variant)

    strategy_keys = list(config.strategies) + [HOME_BASELINE]
    aggregates: dict[str, dict[str, dict[str, RunAggregate]]] = {}
    for strategy in strategy_keys:
        aggregates[strategy] = {}
        for mode in config.modes:
            reports = [
                run.home[mode] if strategy == HOME_BASELINE else run.reports[strategy][mode]
                for run in runs
            ]
            per_metric: dict[str, RunAggregate] = {
                "micro_f1": aggregate_runs(
                    [rep.micro.f1 for rep in reports], "micro_f1"
                ),
                "macro_f1": aggregate_runs(
                    [rep.macro_f1 for rep in reports], "macro_f1"
                ),
            }
            for category in label_set:
                per_metric[f"f1:{category}"] = aggregate_runs(
                    [rep.per_category[category].f1 for rep in reports],
                    f"f1:{category}",
                )
            aggregates[strategy][mode] = per_metric

    anova: dict[str, AnovaResult | None] = {}
    pairwise: dict[str, tuple[PairwiseResult, ...]] = {}
    for mode in config.modes:
        if config.runs < 2 or len(config.strategies) < 2:
            anova[mode] = None
            pairwise[mode] = ()
            if mode == config.modes[0]:
                warnings.append(
                    "significance tests skipped: need at least 2 runs and 2 strategies"
                )
            continue
        groups = [
            [run.reports[strategy][mode].micro.f1 for run in runs]
            for strategy in config.strategies
        ]
        anova[mode] = one_way_anova(groups)
        best_index = max(
            range(len(config.strategies)),
            key=lambda i: aggregates[config.strategies[i]][mode]["micro_f1"].mean,
        )
        best = config.strategies[best_index]
        comparisons = []
        for i, other in enumerate(config.strategies):
            if i == best_index:
                continue
            pair = one_way_anova([groups[best_index], groups[i]])
            comparisons.append(
                PairwiseResult(
                    best=best,
                    other=other,
                    anova=pair,
                    significant=pair.p_value < SIGNIFICANCE_LEVEL,
                )
            )
        pairwise[mode] = tuple(comparisons)

    correlation: dict[str, CorrelationResult | None] = {}
    for mode in config.modes:
        correlation[mode] = _similarity_drop_correlation(
            config, label_set, runs, similarity, mode, site_a, site_b, warnings
        )

    return TransferReport(
        config=config,
        label_set=label_set,
        runs=runs,
        aggregates=aggregates,
        anova=anova,
        pairwise=pairwise,
        correlation=correlation,
        similarity=similarity,
        warnings=tuple(warnings),
    )


def _similarity_drop_correlation(
    config: ExperimentConfig,
    label_set: LabelSet,
    runs: tuple[RunResult, ...],
    similarity: SimilarityReport,
    mode: str,
    site_a: Corpus,
    site_b: Corpus,
    warnings: list[str],
) -> CorrelationResult | None:
    if "direct_transfer" not in config.strategies:
        warnings.append(
            f"correlation skipped ({mode}): direct_transfer not among strategies"
        )
        return None
    present_a = {m.category for m in site_a.mentions()}
    present_b = {m.category for m in site_b.mentions()}
    categories = [
        c for c in label_set if c in present_a and c in present_b
    ]
    if len(categories) < 2:
        warnings.append(
            f"correlation skipped ({mode}): fewer than two categories present in both sites"
        )
        return None
    sims: list[float] = []
    home_f1: list[float] = []
    direct_f1: list[float] = []
    for category in categories:
        sims.append(similarity.per_category[category])
        home_f1.append(
            sum(run.home[mode].per_category[category].f1 for run in runs) / len(runs)
        )
        direct_f1.append(
            sum(
                run.reports["direct_transfer"][mode].per_category[category].f1
                for run in runs
            )
            / len(runs)
        )
    drops = [h - d for h, d in zip(home_f1, direct_f1)]
    try:
        r = pearson(sims, drops)
        note = ""
    except ValueError as exc:
        r = None
        note = str(exc)
        warnings.append(f"correlation undefined ({mode}): {exc}")
    return CorrelationResult(
        r=r,
        categories=tuple(categories),
        similarities=tuple(sims),
        home_f1=tuple(home_f1),
        direct_f1=tuple(direct_f1),
        drops=tuple(drops),
        note=note,
    )


@dataclass(frozen=True)
class PermutationModeResult:
    mode: str
    original: EvalReport
    permuted: EvalReport
    micro_f1_drop: float
    macro_f1_drop: float
    per_category_drop: Mapping[str, float]


@dataclass(frozen=True)
class PermutationReport:
    seed: int
    replaced: int
    skipped: int
    results: Mapping[str, PermutationModeResult]


Predictor = Callable[[Corpus], Corpus]


def run_permutation_analysis(
    predictor: Predictor | object,
    test: Corpus,
    donor: Corpus,
    exclusion: Corpus,
    seed: int,
    modes: Sequence[str] = ("strict", "lenient"),
) -> PermutationReport:
    """Score a predictor on a test corpus and on its permuted twin.

    ``predictor`` is anything with a ``predict(corpus)`` method (a trained
    tagger) or a plain corpus-to-corpus callable. Drops are original minus
    permuted.
    """
    predict_fn = getattr(predictor, "predict", None) or predictor
    pool = build_donor_pool(donor, exclusion)
    permuted, log = permute_test_set(test, pool, seed)
    pred_original = predict_fn(test)
    pred_permuted = predict_fn(permuted)
    results: dict[str, PermutationModeResult] = {}
    for mode in modes:
        original = evaluate(test, pred_original, mode)
        permuted_report = evaluate(permuted, pred_permuted, mode)
        per_category_drop = {
            category: original.per_category[category].f1
            - permuted_report.per_category[category].f1
            for category in test.label_set
        }
        results[mode] = PermutationModeResult(
            mode=mode,
            original=original,
            permuted=permuted_report,
            micro_f1_drop=original.micro.f1 - permuted_report.micro.f1,
            macro_f1_drop=original.macro_f1 - permuted_report.macro_f1,
            per_category_drop=per_category_drop,
        )
    replaced = sum(1 for entry in log if entry.replaced)
    return PermutationReport(
        seed=seed,
        replaced=replaced,
        skipped=len(log) - replaced,
        results=results,
    )


def _float_repr(value: float) -> str:
    return repr(float(value))


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def format_aligned(rows: Sequence[Sequence[str]]) -> str:
    """Left-aligned text table with two-space gutters."""
    if not rows:
        return ""
    widths = [
        max(len(str(row[i])) for row in rows if i < len(row))
        for i in range(max(len(r) for r in rows))
    ]
    lines = []
    for row in rows:
        cells = [str(cell).ljust(widths[i]) for i, cell in enumerate(row)]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


def emit_report(report: TransferReport, output_dir: str | os.PathLike[str]) -> list[str]:
    """Write the report files; returns the paths written.

    Files: config.json, per_run.csv, per_run_categories.csv, aggregate.csv,
    anova.csv, pairwise.csv, correlation.csv, correlation_categories.csv,
    similarity.csv, tables.txt. Deterministic byte-for-byte for a config.
    """
    out = os.fspath(output_dir)
    os.makedirs(out, exist_ok=True)
    written: list[str] = []

    def path_of(name: str) -> str:
        written.append(os.path.join(out, name))
        return written[-1]

    with open(path_of("config.json"), "w", encoding="utf-8") as handle:
        json.dump(report.config.to_mapping(), handle, indent=2, ensure_ascii=False)
        handle.write("\n")

    strategy_keys = list(report.config.strategies) + [HOME_BASELINE]

    rows = []
    cat_rows = []
    for run in report.runs:
        for strategy in strategy_keys:
            for mode in report.config.modes:
                rep = run.home[mode] if strategy == HOME_BASELINE else run.reports[strategy][mode]
                rows.append(
                    [
                        run.run,
                        run.seed,
                        strategy,
                        mode,
                        rep.micro.tp,
                        rep.micro.fp,
                        rep.micro.fn,
                        _float_repr(rep.micro.precision),
                        _float_repr(rep.micro.recall),
                        _float_repr(rep.micro.f1),
                        _float_repr(rep.macro_precision),
                        _float_repr(rep.macro_recall),
                        _float_repr(rep.macro_f1),
                    ]
                )
                for category in report.label_set:
                    scores = rep.per_category[category]
                    cat_rows.append(
                        [
                            run.run,
                            strategy,
                            mode,
                            category,
                            scores.tp,
                            scores.fp,
                            scores.fn,
                            _float_repr(scores.precision),
                            _float_repr(scores.recall),
                            _float_repr(scores.f1),
                        ]
                    )
    _write_csv(
        path_of("per_run.csv"),
        [
            "run", "seed", "strategy", "mode", "tp", "fp", "fn",
            "micro_precision", "micro_recall", "micro_f1",
            "macro_precision", "macro_recall", "macro_f1",
        ],
        rows,
    )
    _write_csv(
        path_of("per_run_categories.csv"),
        ["run", "strategy", "mode", "category", "tp", "fp", "fn", "precision", "recall", "f1"],
        cat_rows,
    )

    agg_rows = []
    for strategy in strategy_keys:
        for mode in report.config.modes:
            for metric, aggregate in report.aggregates[strategy][mode].items():
                agg_rows.append(
                    [
                        strategy,
                        mode,
                        metric,
                        _float_repr(aggregate.mean),
                        _float_repr(aggregate.std),
                        aggregate.runs,
                    ]
                )
    _write_csv(
        path_of("aggregate.csv"),
        ["strategy", "mode", "metric", "mean", "std", "runs"],
        agg_rows,
    )

    anova_rows = []
    for mode in report.config.modes:
        result = report.anova[mode]
        if result is None:
            anova_rows.append([mode, "", "", "", ""])
        else:
            anova_rows.append(
                [
                    mode,
                    _float_repr(result.f_statistic),
                    result.df_between,
                    result.df_within,
                    _float_repr(result.p_value),
                ]
            )
    _write_csv(
        path_of("anova.csv"),
        ["mode", "f_statistic", "df_between", "df_within", "p_value"],
        anova_rows,
    )

    pair_rows = []
    for mode in report.config.modes:
        for pair in report.pairwise[mode]:
            pair_rows.append(
                [
                    mode,
                    pair.best,
                    pair.other,
                    _float_repr(pair.anova.f_statistic),
                    _float_repr(pair.anova.p_value),
                    "yes" if pair.significant else "no",
                ]
            )
    _write_csv(
        path_of("pairwise.csv"),
        ["mode", "best", "other", "f_statistic", "p_value", "significant"],
        pair_rows,
    )

    corr_rows = []
    corr_cat_rows = []
    for mode in report.config.modes:
        result = report.correlation[mode]
        if result is None:
            corr_rows.append([mode, "", 0, "skipped"])
            continue
        corr_rows.append(
            [
                mode,
                _float_repr(result.r) if result.r is not None else "",
                len(result.categories),
                result.note,
            ]
        )
        for i, category in enumerate(result.categories):
            corr_cat_rows.append(
                [
                    mode,
                    category,
                    _float_repr(result.similarities[i]),
                    _float_repr(result.home_f1[i]),
                    _float_repr(result.direct_f1[i]),
                    _float_repr(result.drops[i]),
                ]
            )
    _write_csv(
        path_of("correlation.csv"),
        ["mode", "pearson_r", "n_categories", "note"],
        corr_rows,
    )
    _write_csv(
        path_of("correlation_categories.csv"),
        ["mode", "category", "similarity", "home_f1", "direct_f1", "f1_drop"],
        corr_cat_rows,
    )

    sim_rows = [["corpus", "", report.similarity.variant, _float_repr(report.similarity.overall)]]
    for category in report.label_set:
        sim_rows.append(
            [
                "category",
                category,
                report.similarity.variant,
                _float_repr(report.similarity.per_category[category]),
            ]
        )
    sim_rows.append(
        ["category_mean", "", report.similarity.variant, _float_repr(report.similarity.category_mean)]
    )
    _write_csv(
        path_of("similarity.csv"),
        ["scope", "category", "idf_variant", "similarity"],
        sim_rows,
    )

    with open(path_of("tables.txt"), "w", encoding="utf-8") as handle:
        handle.write(format_tables(report))
        handle.write("\n")
    return written


def format_tables(report: TransferReport) -> str:
    """Aligned text tables: strict values with lenient in parentheses when
    both modes were computed."""
    modes = report.config.modes
    primary = modes[0]
    secondary = modes[1] if len(modes) > 1 else None

    def cell(strategy: str, metric: str) -> str:
        main = report.aggregates[strategy][primary][metric]
        text = f"{main.mean:.4f}"
        if secondary is not None:
            other = report.aggregates[strategy][secondary][metric]
            text += f" ({other.mean:.4f})"
        return text

    strategy_keys = list(report.config.strategies) + [HOME_BASELINE]
    blocks: list[str] = []
    header_note = (
        f"{primary} ({secondary})" if secondary else primary
    )
    rows = [["strategy", f"micro_f1 {header_note}", f"macro_f1 {header_note}", f"{primary} std"]]
    for strategy in strategy_keys:
        rows.append(
            [
                strategy,
                cell(strategy, "micro_f1"),
                cell(strategy, "macro_f1"),
                f"{report.aggregates[strategy][primary]['micro_f1'].std:.4f}",
            ]
        )
    blocks.append(
        f"Transfer results over {report.config.runs} runs "
        f"(home_baseline scores site A's own test split)\n" + format_aligned(rows)
    )

    rows = [["category"] + strategy_keys]
    for category in report.label_set:
        row = [category]
        for strategy in strategy_keys:
            row.append(cell(strategy, f"f1:{category}"))
        rows.append(row)
    blocks.append("Per-category F1\n" + format_aligned(rows))

    lines = []
    for mode in modes:
        result = report.anova[mode]
        if result is None:
            lines.append(f"{mode}: not computed")
            continue
        lines.append(
            f"{mode}: F({result.df_between}, {result.df_within}) = "
            f"{result.f_statistic:.4f}, p = {result.p_value:.6f}"
        )
        for pair in report.pairwise[mode]:
            marker = "significant" if pair.significant else "not significant"
            lines.append(
                f"  {pair.best} vs {pair.other}: p = {pair.anova.p_value:.6f} ({marker})"
            )
    blocks.append("ANOVA across strategies (micro F1)\n" + "\n".join(lines))

    lines = [
        f"corpus similarity ({report.similarity.variant} IDF): "
        f"{report.similarity.overall:.4f}; category mean: "
        f"{report.similarity.category_mean:.4f}"
    ]
    for mode in modes:
        result = report.correlation[mode]
        if result is None:
            lines.append(f"{mode}: correlation not computed")
        elif result.r is None:
            lines.append(f"{mode}: correlation undefined ({result.note})")
        else:
            lines.append(
                f"{mode}: Pearson r(similarity, transfer drop) = {result.r:.4f} "
                f"over {len(result.categories)} categories"
            )
    blocks.append("Similarity and transfer drop\n" + "\n".join(lines))

    if report.warnings:
        blocks.append("Warnings\n" + "\n".join(f"- {w}" for w in report.warnings))
    return "\n\n".join(blocks)
