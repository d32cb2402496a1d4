"""Command line interface.

Corpora are JSONL files (one document object per line); see the README for
the record layout. The base random seed is a group-level option so every
subcommand shares one seeding convention::

    nerport --seed 7 permute test.jsonl donor.jsonl train.jsonl --out permuted.jsonl
"""

from __future__ import annotations

import dataclasses
import json
import sys

import click

from .corpus import (
    Corpus,
    CorpusError,
    LabelSet,
    compute_stats,
    export_conll,
    import_conll,
    load_corpus,
    save_corpus,
)
from .crf import CrfModel, FeatureConfig, TrainConfig, fine_tune, predict, train
from .ecr import BUCKET_LABELS, ecr_table, entity_counts, per_bucket_eval, bucket_of
from .evaluation import EvalReport, evaluate
from .experiment import (
    ExperimentConfig,
    emit_report,
    format_aligned,
    format_tables,
    import_predictions,
    run_transfer_experiment,
)
from .perturbation import build_donor_pool, permute_test_set, write_replacement_log
from .similarity import IDF_VARIANTS, similarity_report
from .synth import default_synth_spec, generate_synthetic, spec_from_mapping


def _parse_label_set(labels: str | None) -> LabelSet:
    if not labels:
        return LabelSet.default()
    parts = tuple(part.strip() for part in labels.split(",") if part.strip())
    if not parts:
        raise click.BadParameter("no categories given")
    return LabelSet(parts)


def _load(path: str, label_set: LabelSet, *, allow_overlap: bool = False) -> Corpus:
    try:
        return load_corpus(path, label_set, allow_overlap=allow_overlap)
    except CorpusError as exc:
        raise click.ClickException(str(exc)) from None


labels_option = click.option(
    "--labels",
    default=None,
    help="Comma-separated entity categories (default: the eight phenotype categories).",
)


@click.group()
@click.option("--seed", type=int, default=0, show_default=True, help="Base random seed.")
@click.pass_context
def main(ctx: click.Context, seed: int) -> None:
    """Cross-site NER portability toolkit."""
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed


@main.command()
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@labels_option
@click.option("--allow-overlap", is_flag=True, help="Admit overlapping mentions (prediction files).")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["jsonl", "conll"]),
    default="jsonl",
    show_default=True,
)
def validate(corpus_path: str, labels: str | None, allow_overlap: bool, fmt: str) -> None:
    """Check that a corpus file parses and satisfies every invariant."""
    label_set = _parse_label_set(labels)
    try:
        if fmt == "conll":
            corpus = import_conll(corpus_path, label_set)
        else:
            corpus = load_corpus(corpus_path, label_set, allow_overlap=allow_overlap)
    except CorpusError as exc:
        raise click.ClickException(str(exc)) from None
    mentions = sum(len(doc.mentions) for doc in corpus.documents)
    click.echo(f"OK: {len(corpus.documents)} documents, {mentions} mentions")


@main.command()
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@labels_option
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None,
              help="Also write the statistics as JSON.")
def stats(corpus_path: str, labels: str | None, json_out: str | None) -> None:
    """Corpus descriptive statistics."""
    corpus = _load(corpus_path, _parse_label_set(labels))
    result = compute_stats(corpus)
    rows = [
        ["documents", str(result.num_documents)],
        ["sentences", str(result.num_sentences)],
        ["tokens", str(result.num_tokens)],
        ["unique tokens", str(result.num_unique_tokens)],
        ["tokens/sentence", f"{result.avg_tokens_per_sentence:.2f}"],
    ]
    click.echo(format_aligned(rows))
    click.echo()
    cat_rows = [["category", "mentions", "unique surfaces"]]
    for category, cat in result.per_category.items():
        cat_rows.append([category, str(cat.mentions), str(cat.unique_surfaces)])
    click.echo(format_aligned(cat_rows))
    if json_out:
        payload = {
            "num_documents": result.num_documents,
            "num_sentences": result.num_sentences,
            "num_tokens": result.num_tokens,
            "num_unique_tokens": result.num_unique_tokens,
            "avg_tokens_per_sentence": result.avg_tokens_per_sentence,
            "per_category": {
                category: {"mentions": cat.mentions, "unique_surfaces": cat.unique_surfaces}
                for category, cat in result.per_category.items()
            },
        }
        with open(json_out, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2, ensure_ascii=False)
            handle.write("\n")


@main.command()
@click.argument("corpus_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("corpus_b", type=click.Path(exists=True, dir_okay=False))
@labels_option
@click.option("--variant", type=click.Choice(sorted(IDF_VARIANTS)), default="paper",
              show_default=True, help="IDF formula: log(N)/df or log(N/df).")
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None)
def similarity(corpus_a: str, corpus_b: str, labels: str | None, variant: str,
               json_out: str | None) -> None:
    """Averaged TF-IDF cosine similarity between two corpora."""
    label_set = _parse_label_set(labels)
    a = _load(corpus_a, label_set)
    b = _load(corpus_b, label_set)
    report = similarity_report(a, b, variant)
    rows = [["scope", "similarity", "vocab A", "vocab B"]]
    rows.append([
        "overall",
        f"{report.overall:.4f}",
        str(report.overall_vocab[0]),
        str(report.overall_vocab[1]),
    ])
    for category, value in report.per_category.items():
        vocab = report.per_category_vocab[category]
        rows.append([category, f"{value:.4f}", str(vocab[0]), str(vocab[1])])
    rows.append(["category mean", f"{report.category_mean:.4f}", "", ""])
    click.echo(format_aligned(rows))
    if json_out:
        payload = {
            "corpus_a": report.corpus_a,
            "corpus_b": report.corpus_b,
            "variant": report.variant,
            "overall": report.overall,
            "per_category": dict(report.per_category),
            "category_mean": report.category_mean,
        }
        with open(json_out, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2, ensure_ascii=False)
            handle.write("\n")


@main.command()
@click.argument("train_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("test_path", type=click.Path(exists=True, dir_okay=False))
@labels_option
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the per-surface table as CSV instead of printing it.")
@click.option("--pred", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Prediction corpus: adds per-bucket precision/recall/F1.")
@click.option("--mode", type=click.Choice(["strict", "lenient"]), default="strict",
              show_default=True, help="Matching mode for --pred bucket scores.")
def ecr(train_path: str, test_path: str, labels: str | None, out: str | None,
        pred: str | None, mode: str) -> None:
    """Entity coverage ratio of a test corpus by a training corpus."""
    label_set = _parse_label_set(labels)
    train_corpus = _load(train_path, label_set)
    test_corpus = _load(test_path, label_set)
    table = ecr_table(train_corpus, test_corpus)
    lines = ["surface,c_train,c_test,ecr,bucket"]
    for record in table:
        bucket = BUCKET_LABELS[bucket_of(record.ecr)]
        surface = record.surface.replace('"', '""')
        lines.append(f'"{surface}",{record.c_train},{record.c_test},{record.ecr!r},{bucket}')
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")
        click.echo(f"wrote {len(table)} surfaces to {out}")
    else:
        click.echo("\n".join(lines))
    if pred:
        pred_corpus = _load(pred, label_set, allow_overlap=True)
        report = per_bucket_eval(
            test_corpus, pred_corpus, table, mode,
            train_counts=entity_counts(train_corpus),
        )
        rows = [["bucket", "gold", "pred", "tp", "fp", "fn", "P", "R", "F1"]]
        for bucket_scores in report.buckets:
            s = bucket_scores.scores
            rows.append([
                bucket_scores.label,
                str(bucket_scores.gold_mentions),
                str(bucket_scores.pred_mentions),
                str(s.tp), str(s.fp), str(s.fn),
                f"{s.precision:.4f}", f"{s.recall:.4f}", f"{s.f1:.4f}",
            ])
        click.echo()
        click.echo(f"per-bucket scores ({report.mode})")
        click.echo(format_aligned(rows))


@main.command()
@click.argument("test_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("donor_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("exclusion_path", type=click.Path(exists=True, dir_okay=False))
@labels_option
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Path for the permuted corpus (JSONL).")
@click.option("--log", "log_path", type=click.Path(dir_okay=False), default=None,
              help="Path for the CSV replacement audit log.")
@click.pass_context
def permute(ctx: click.Context, test_path: str, donor_path: str, exclusion_path: str,
            labels: str | None, out: str, log_path: str | None) -> None:
    """Replace every test mention with a seeded same-category donor surface.

    Donor surfaces come from DONOR_PATH minus everything occurring in
    EXCLUSION_PATH (typically the training data).
    """
    label_set = _parse_label_set(labels)
    test_corpus = _load(test_path, label_set)
    donor = _load(donor_path, label_set)
    exclusion = _load(exclusion_path, label_set)
    pool = build_donor_pool(donor, exclusion)
    for category in label_set:
        if not pool.surfaces.get(category):
            click.echo(f"warning: empty donor pool for {category}; its mentions stay", err=True)
    permuted, log = permute_test_set(test_corpus, pool, ctx.obj["seed"])
    save_corpus(permuted, out)
    replaced = sum(1 for entry in log if entry.replaced)
    click.echo(f"replaced {replaced} of {len(log)} mentions; wrote {out}")
    if log_path:
        write_replacement_log(log, log_path)
        click.echo(f"replacement log: {log_path}")


def _echo_eval(reports: dict[str, EvalReport], label_set: LabelSet) -> None:
    primary = "strict" if "strict" in reports else next(iter(reports))
    secondary = "lenient" if primary == "strict" and "lenient" in reports else None

    def cell(get) -> str:
        text = f"{get(reports[primary]):.4f}"
        if secondary:
            text += f" ({get(reports[secondary]):.4f})"
        return text

    header = f"{primary} ({secondary})" if secondary else primary
    rows = [["category", f"P {header}", f"R {header}", f"F1 {header}", "gold"]]
    for category in label_set:
        gold_count = (
            reports[primary].per_category[category].tp
            + reports[primary].per_category[category].fn
        )
        rows.append([
            category,
            cell(lambda r, c=category: r.per_category[c].precision),
            cell(lambda r, c=category: r.per_category[c].recall),
            cell(lambda r, c=category: r.per_category[c].f1),
            str(gold_count),
        ])
    rows.append([
        "micro",
        cell(lambda r: r.micro.precision),
        cell(lambda r: r.micro.recall),
        cell(lambda r: r.micro.f1),
        str(reports[primary].micro.tp + reports[primary].micro.fn),
    ])
    rows.append([
        "macro",
        cell(lambda r: r.macro_precision),
        cell(lambda r: r.macro_recall),
        cell(lambda r: r.macro_f1),
        "",
    ])
    click.echo(format_aligned(rows))


@main.command("evaluate")
@click.argument("gold_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("pred_path", type=click.Path(exists=True, dir_okay=False))
@labels_option
@click.option("--mode", type=click.Choice(["strict", "lenient", "both"]), default="both",
              show_default=True)
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None)
def evaluate_cmd(gold_path: str, pred_path: str, labels: str | None, mode: str,
                 json_out: str | None) -> None:
    """Score a prediction corpus against gold annotations."""
    label_set = _parse_label_set(labels)
    gold = _load(gold_path, label_set)
    try:
        pred = import_predictions(pred_path, gold)
    except CorpusError as exc:
        raise click.ClickException(str(exc)) from None
    modes = ("strict", "lenient") if mode == "both" else (mode,)
    reports = {m: evaluate(gold, pred, m) for m in modes}
    _echo_eval(reports, label_set)
    if json_out:
        payload = {
            m: {
                "micro": {"precision": r.micro.precision, "recall": r.micro.recall,
                          "f1": r.micro.f1, "tp": r.micro.tp, "fp": r.micro.fp,
                          "fn": r.micro.fn},
                "macro": {"precision": r.macro_precision, "recall": r.macro_recall,
                          "f1": r.macro_f1},
                "per_category": {
                    category: {"precision": s.precision, "recall": s.recall, "f1": s.f1,
                               "tp": s.tp, "fp": s.fp, "fn": s.fn}
                    for category, s in r.per_category.items()
                },
            }
            for m, r in reports.items()
        }
        with open(json_out, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2, ensure_ascii=False)
            handle.write("\n")


def _train_options(fn):
    for option in reversed([
        click.option("--lr", type=float, default=0.5, show_default=True,
                     help="Gradient ascent learning rate."),
        click.option("--iterations", type=int, default=100, show_default=True),
        click.option("--l2", type=float, default=0.01, show_default=True,
                     help="L2 regularization strength."),
        click.option("--dev-eval-interval", type=int, default=0, show_default=True,
                     help="Evaluate on --dev every N iterations (0: never)."),
    ]):
        fn = option(fn)
    return fn


def _feature_options(fn):
    for option in reversed([
        click.option("--window", type=int, default=2, show_default=True,
                     help="Neighbor token window on each side."),
        click.option("--affixes", default="1,2,3", show_default=True,
                     help="Comma-separated prefix/suffix lengths; empty to disable."),
        click.option("--shape/--no-shape", "shape_features", default=True,
                     show_default=True, help="Token shape, digit, and symbol features."),
        click.option("--embeddings", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="Word vector text file (token v1 .. vd)."),
        click.option("--embedding-dim", type=int, default=0, show_default=True),
    ]):
        fn = option(fn)
    return fn


def _parse_affixes(affixes: str) -> tuple[int, ...]:
    if not affixes.strip():
        return ()
    try:
        return tuple(int(part) for part in affixes.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter(f"bad affix lengths {affixes!r}") from None


@main.command("train-crf")
@click.argument("data_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_out", type=click.Path(dir_okay=False), required=True,
              help="Where to save the trained model (JSON).")
@click.option("--dev", "dev_path", type=click.Path(exists=True, dir_okay=False), default=None)
@labels_option
@_feature_options
@_train_options
@click.pass_context
def train_crf(ctx: click.Context, data_path: str, model_out: str, dev_path: str | None,
              labels: str | None, window: int, affixes: str, shape_features: bool,
              embeddings: str | None, embedding_dim: int, lr: float, iterations: int,
              l2: float, dev_eval_interval: int) -> None:
    """Train a linear-chain CRF tagger from scratch."""
    label_set = _parse_label_set(labels)
    data = _load(data_path, label_set)
    dev = _load(dev_path, label_set) if dev_path else None
    feature_config = FeatureConfig(
        window=window,
        affix_lengths=_parse_affixes(affixes),
        shape_features=shape_features,
        embeddings_path=embeddings,
        embedding_dim=embedding_dim,
    )
    train_config = TrainConfig(
        learning_rate=lr, iterations=iterations, l2=l2,
        seed=ctx.obj["seed"], dev_eval_interval=dev_eval_interval,
    )
    try:
        model = train(data, dev, feature_config=feature_config, train_config=train_config)
    except (CorpusError, ValueError) as exc:
        raise click.ClickException(str(exc)) from None
    model.save(model_out)
    objective = model.metadata["final_objective"]
    click.echo(
        f"trained on {len(data.documents)} documents: "
        f"{len(model.feature_index)} features"
        + (f", objective {objective:.6f}" if objective is not None else "")
    )
    for entry in model.metadata.get("dev_history", []):
        click.echo(f"  iteration {entry['iteration']}: dev strict micro-F1 {entry['micro_f1']:.4f}")
    click.echo(f"model: {model_out}")


@main.command("finetune-crf")
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("data_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "model_out", type=click.Path(dir_okay=False), required=True,
              help="Where to save the fine-tuned model.")
@click.option("--dev", "dev_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--pooled", is_flag=True,
              help="Retrain from scratch on base corpus + new data instead of warm-starting.")
@click.option("--base-corpus", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Base training corpus, required with --pooled.")
@_train_options
@click.pass_context
def finetune_crf(ctx: click.Context, model_path: str, data_path: str, model_out: str,
                 dev_path: str | None, pooled: bool, base_corpus: str | None,
                 lr: float, iterations: int, l2: float, dev_eval_interval: int) -> None:
    """Continue training a saved model on new-site data (warm start)."""
    base = CrfModel.load(model_path)
    data = _load(data_path, base.label_set)
    dev = _load(dev_path, base.label_set) if dev_path else None
    base_data = _load(base_corpus, base.label_set) if base_corpus else None
    if pooled and base_data is None:
        raise click.UsageError("--pooled requires --base-corpus")
    train_config = TrainConfig(
        learning_rate=lr, iterations=iterations, l2=l2,
        seed=ctx.obj["seed"], dev_eval_interval=dev_eval_interval,
    )
    try:
        model = fine_tune(
            base, data, dev,
            train_config=train_config, pooled=pooled, base_corpus=base_data,
        )
    except (CorpusError, ValueError) as exc:
        raise click.ClickException(str(exc)) from None
    model.save(model_out)
    grown = len(model.feature_index) - len(base.feature_index)
    click.echo(
        f"fine-tuned on {len(data.documents)} documents "
        f"({'pooled retrain' if pooled else f'{grown} new features'}); model: {model_out}"
    )


@main.command("predict-crf")
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("data_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Path for the prediction corpus (JSONL).")
@click.option("--conll", "conll_out", type=click.Path(dir_okay=False), default=None,
              help="Also write token/tag CoNLL output.")
def predict_crf(model_path: str, data_path: str, out: str, conll_out: str | None) -> None:
    """Tag a corpus with a saved model."""
    model = CrfModel.load(model_path)
    data = _load(data_path, model.label_set)
    pred = predict(model, data)
    save_corpus(pred, out)
    mentions = sum(len(doc.mentions) for doc in pred.documents)
    click.echo(f"predicted {mentions} mentions over {len(pred.documents)} documents; wrote {out}")
    if conll_out:
        export_conll(pred, conll_out)
        click.echo(f"CoNLL output: {conll_out}")


@main.command("import-pred")
@click.argument("gold_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("pred_path", type=click.Path(exists=True, dir_okay=False))
@labels_option
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the validated predictions back out in canonical form.")
def import_pred(gold_path: str, pred_path: str, labels: str | None, out: str | None) -> None:
    """Validate an externally produced prediction file against a gold corpus."""
    label_set = _parse_label_set(labels)
    gold = _load(gold_path, label_set)
    try:
        pred = import_predictions(pred_path, gold)
    except CorpusError as exc:
        raise click.ClickException(str(exc)) from None
    mentions = sum(len(doc.mentions) for doc in pred.documents)
    missing = len(gold.documents) - len(pred.documents)
    click.echo(
        f"OK: {mentions} predicted mentions over {len(pred.documents)} documents"
        + (f" ({missing} gold documents unpredicted)" if missing else "")
    )
    if out:
        save_corpus(pred, out)
        click.echo(f"canonical copy: {out}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Experiment config JSON; flags override its fields.")
@click.option("--site-a", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--site-b", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--output-dir", default=None, help="Report directory.")
@click.option("--runs", type=int, default=None)
@click.option("--ratios", default=None, help="train,dev,test split ratios, e.g. 0.6,0.1,0.3.")
@click.option("--strategies", default=None,
              help="Comma-separated subset of direct_transfer,fine_tune,local_train.")
@click.option("--modes", default=None, help="Comma-separated subset of strict,lenient.")
@click.option("--idf-variant", type=click.Choice(sorted(IDF_VARIANTS)), default=None)
@labels_option
@click.pass_context
def experiment(ctx: click.Context, config_path: str | None, site_a: str | None,
               site_b: str | None, output_dir: str | None, runs: int | None,
               ratios: str | None, strategies: str | None, modes: str | None,
               idf_variant: str | None, labels: str | None) -> None:
    """Run the full cross-site transfer protocol and write its report files."""
    mapping: dict = {}
    if config_path:
        with open(config_path, encoding="utf-8") as handle:
            mapping = json.load(handle)
    if site_a:
        mapping["site_a"] = site_a
    if site_b:
        mapping["site_b"] = site_b
    if output_dir:
        mapping["output_dir"] = output_dir
    if runs is not None:
        mapping["runs"] = runs
    if ratios:
        mapping["ratios"] = [float(part) for part in ratios.split(",")]
    if strategies:
        mapping["strategies"] = [part.strip() for part in strategies.split(",") if part.strip()]
    if modes:
        mapping["modes"] = [part.strip() for part in modes.split(",") if part.strip()]
    if idf_variant:
        mapping["idf_variant"] = idf_variant
    if labels:
        mapping["labels"] = list(_parse_label_set(labels))
    if ctx.obj["seed"] or "seed" not in mapping:
        mapping["seed"] = ctx.obj["seed"]
    try:
        config = ExperimentConfig.from_mapping(mapping)
    except (ValueError, TypeError) as exc:
        raise click.ClickException(f"bad experiment config: {exc}") from None
    if not config.site_a or not config.site_b:
        raise click.UsageError("both --site-a and --site-b (or config fields) are required")
    report = run_transfer_experiment(config)
    written = emit_report(report, config.output_dir)
    click.echo(format_tables(report))
    click.echo()
    for path in written:
        click.echo(f"wrote {path}")


@main.command()
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Path for the generated corpus (JSONL).")
@click.option("--site", type=click.Choice(["a", "b"]), default="a", show_default=True)
@click.option("--shift", type=float, default=0.0, show_default=True,
              help="Fraction of site A vocabulary/templates replaced at site B.")
@click.option("--docs", type=int, default=40, show_default=True)
@click.option("--name", default=None, help="Corpus name (default: site_a / site_b).")
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Generator spec JSON overriding the built-in pools.")
@click.pass_context
def synth(ctx: click.Context, out: str, site: str, shift: float, docs: int,
          name: str | None, spec_path: str | None) -> None:
    """Generate a synthetic two-site style corpus."""
    if spec_path:
        with open(spec_path, encoding="utf-8") as handle:
            spec = spec_from_mapping(json.load(handle))
        if name:
            spec = dataclasses.replace(spec, name=name)
    else:
        spec = default_synth_spec(
            site=site, shift=shift, num_documents=docs,
            name=name or f"site_{site}",
        )
    corpus = generate_synthetic(spec, ctx.obj["seed"])
    save_corpus(corpus, out)
    mentions = sum(len(doc.mentions) for doc in corpus.documents)
    click.echo(f"generated {len(corpus.documents)} documents, {mentions} mentions; wrote {out}")


if __name__ == "__main__":
    main(sys.argv[1:])
