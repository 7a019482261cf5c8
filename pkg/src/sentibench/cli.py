"""Command-line entry point: ``sentibench <command> [options]``.

Exit codes: 0 success, 1 evaluation-domain error (e.g. a single-class split),
2 I/O or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from typing import Optional, Sequence

from . import __version__
from .corpus import (
    Corpus,
    Dataset,
    atomic_write_text,
    filter_polarity_task,
    ingest_raw,
    merge_corpora,
    read_consolidated,
    write_consolidated,
)
from .errors import SentibenchError
from .evaluation import (
    ALL_COMBINED,
    ClassifierConfig,
    Pipeline,
    cross_eval,
    dataset_stats,
    evaluate,
    fit_pipeline,
    sweep_vocab_sizes,
    word_overlap_matrix,
)
from .model import load_model, save_model
from .partition import StratifyKey, apply_assignment, assign_folds, development_and_test, fold_counts, is_balanced, split
from .reports import render
from .textprep import NormalizationConfig, load_stopwords, preprocess
from .vectorize import EmbeddingFeaturizer, TfidfModel, load_embeddings

logger = logging.getLogger("sentibench")

DEFAULTS = {
    "seed": 42,
    "threads": os.cpu_count() or 1,
    "format": "md",
    "stopwords": None,
    "tfidf_mode": "smoothed",
    "ngrams": "1..3",
    "vocab_size": 500_000,
    "min_count": 5,
    "embeddings": None,
    "embedding_dim": None,
    "features": "tfidf",
    "stratify": "polarity",
    "lam": None,
    "tol": 1e-4,
    "max_epochs": 1000,
    "col_text": "review_text",
    "col_rating": "rating",
    "col_id": None,
    "col_fold": None,
}


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise SentibenchError(f"{path}: invalid config ({exc})") from exc
    config = {k.replace("-", "_"): v for k, v in raw.items()}
    unknown = sorted(set(config) - set(DEFAULTS))
    if unknown:
        raise SentibenchError(f"{path}: unknown config keys {unknown}")
    return config


def resolve(args: argparse.Namespace) -> dict:
    """Explicit flags win over the config file, which wins over built-in defaults."""
    overlay = _load_config(getattr(args, "config", None))
    resolved = {}
    for key, default in DEFAULTS.items():
        if not hasattr(args, key):
            continue
        value = getattr(args, key)
        if value is None:
            value = overlay.get(key, default)
        resolved[key] = value
        setattr(args, key, value)
    return resolved


def _parse_ngrams(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            lo, hi = text.split("..")
        else:
            lo = hi = text
        return int(lo), int(hi)
    except ValueError:
        raise SentibenchError(f"--ngrams expects 'lo..hi', got {text!r}") from None


def _classifier_config(args) -> ClassifierConfig:
    return ClassifierConfig(
        features=getattr(args, "features", "tfidf"),
        tfidf_mode=args.tfidf_mode,
        ngram_range=_parse_ngrams(args.ngrams),
        vocab_size=int(args.vocab_size),
        min_count=int(args.min_count),
        lam=None if args.lam is None else float(args.lam),
        tol=float(args.tol),
        max_epochs=int(args.max_epochs),
        seed=int(args.seed),
        threads=int(args.threads),
    )


def _select(corpus: Corpus, name: str) -> Corpus:
    if name.lower() in ("all", "all_combined", "all combined"):
        return corpus.with_reviews(corpus.reviews, ALL_COMBINED)
    ds = Dataset.parse(name)
    part = corpus.by_dataset(ds)
    if not part.reviews:
        raise SentibenchError(f"dataset {ds.display} not present in the consolidated file")
    return part


def _emit(args, report: dict) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if getattr(args, "report", None):
        atomic_write_text(args.report, text)
    sys.stdout.write(render(report, args.format))


def _report(command: str, resolved: dict, result) -> dict:
    config = {k: v for k, v in resolved.items() if k != "threads"}
    return {"command": command, "version": __version__, "config": config, "result": result}


def _norm_config(args) -> NormalizationConfig:
    return NormalizationConfig(stopword_set=frozenset(load_stopwords(args.stopwords)))


# --- commands ---------------------------------------------------------------


def cmd_prepare(args, resolved) -> int:
    norm = _norm_config(args)
    corpora = []
    summary = {}
    column_map = {"text": args.col_text, "rating": args.col_rating, "id": args.col_id, "fold": args.col_fold}
    for item in args.input:
        if "=" not in item:
            raise SentibenchError(f"--input expects DATASET=PATH, got {item!r}")
        name, path = item.split("=", 1)
        ds = Dataset.parse(name)
        corpus, counts = ingest_raw(path, ds, column_map)
        tokenized = corpus.with_reviews(replace(r, tokens=tuple(preprocess(r.text, norm))) for r in corpus.reviews)
        corpora.append(tokenized)
        summary[ds.value] = counts.as_dict()
    merged = merge_corpora(corpora)
    write_consolidated(merged, args.output, require_folds=args.col_fold is not None)
    for ds, counts in summary.items():
        print(
            f"{ds}: rows={counts['rows']} kept={counts['kept']} malformed={counts['malformed']} "
            f"empty_text={counts['empty_text']} null_rating={counts['null_rating']} "
            f"zero_rating={counts['zero_rating']} out_of_range={counts['out_of_range']}"
        )
    return 0


def cmd_partition(args, resolved) -> int:
    corpus = read_consolidated(args.consolidated)
    key = StratifyKey(args.stratify)
    assignment = assign_folds(corpus, int(args.seed), key)
    folded = apply_assignment(corpus, assignment)
    counts = fold_counts(folded, key)
    if not is_balanced(counts):
        raise SentibenchError("fold assignment violates the stratification bound")
    write_consolidated(folded, args.output or args.consolidated)
    print("dataset\tstratum\t" + "\t".join(f"fold{i}" for i in range(1, 11)))
    for (ds, stratum), row in counts.items():
        print(f"{ds}\t{stratum}\t" + "\t".join(str(c) for c in row))
    print("stratification balance: ok (every fold within 1 of its proportional share)")
    return 0


def cmd_stats(args, resolved) -> int:
    corpus = read_consolidated(args.consolidated)
    result = {"datasets": dataset_stats(corpus, int(args.min_count))}
    if len(corpus.datasets()) >= 2:
        result["overlap"] = word_overlap_matrix(corpus, int(args.min_count)).as_dict()
    _emit(args, _report("stats", resolved, result))
    return 0


def _load_featurizer(model, args):
    space = model.feature_space
    if space.get("kind") == "tfidf":
        return TfidfModel.from_dict(space)
    if not args.embeddings:
        raise SentibenchError("model uses embedding features; pass --embeddings")
    table = load_embeddings(args.embeddings, args.embedding_dim)
    return EmbeddingFeaturizer.from_dict(space, table)


def cmd_train(args, resolved) -> int:
    corpus = _select(read_consolidated(args.consolidated), args.dataset)
    config = _classifier_config(args)
    dev, _ = development_and_test(filter_polarity_task(corpus))
    table = None
    if config.features == "embedding":
        if not args.embeddings:
            raise SentibenchError("--features embedding requires --embeddings")
        table = load_embeddings(args.embeddings, args.embedding_dim)
    pipe = fit_pipeline(dev, config, embeddings=table)
    save_model(pipe.model, args.model)
    result = {
        "dataset": corpus.name,
        "n_train": len(dev),
        "dims": pipe.model.dims,
        "epochs": pipe.model.epochs,
        "converged": pipe.model.converged,
        "model_descriptor": pipe.model.descriptor,
        "classifier": config.as_dict(),
    }
    _emit(args, _report("train", resolved, result))
    return 0


def cmd_eval(args, resolved) -> int:
    corpus = _select(read_consolidated(args.consolidated), args.dataset)
    model = load_model(args.model)
    pipe = Pipeline(_load_featurizer(model, args), model)
    train, val, test = split(filter_polarity_task(corpus))
    part = {"train": train, "validation": val, "test": test}[args.split]
    report = evaluate(pipe, part, corpus.name, args.split)
    _emit(args, _report("eval", resolved, report.as_dict()))
    return 0


def cmd_sweep(args, resolved) -> int:
    corpus = _select(read_consolidated(args.consolidated), args.dataset)
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    points = sweep_vocab_sizes(corpus, sizes, _classifier_config(args), corpus.name)
    _emit(args, _report("sweep", resolved, {"dataset": corpus.name, "points": [p.as_dict() for p in points]}))
    return 0


def cmd_crosseval(args, resolved) -> int:
    corpus = read_consolidated(args.consolidated)
    names = [s for s in (args.datasets or "").split(",") if s.strip()]
    chosen = [Dataset.parse(n) for n in names] if names else corpus.datasets()
    datasets = {ds.display: _select(corpus, ds.value) for ds in chosen}
    matrix = cross_eval(datasets, _classifier_config(args), include_all_column=args.all_column)
    _emit(args, _report("cross-eval", resolved, matrix.as_dict()))
    return 0


def cmd_report(args, resolved) -> int:
    with open(args.report_file, encoding="utf-8") as fh:
        try:
            report = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SentibenchError(f"{args.report_file}: not a JSON report ({exc})") from exc
    sys.stdout.write(render(report, args.format))
    return 0


# --- parser -----------------------------------------------------------------


def _shared() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="TOML file of key = value defaults (explicit flags win)")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="worker threads (default: all cores); results do not depend on it")
    p.add_argument("--format", choices=["json", "md", "tsv"])
    p.add_argument("--stopwords", help="stopword file (default: bundled Portuguese list)")
    p.add_argument("--log-level", default="INFO")
    return p


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tfidf-mode", choices=["raw", "smoothed", "raw_eq1", "smoothed_l2"])
    p.add_argument("--ngrams", help="n-gram range lo..hi (default 1..3)")
    p.add_argument("--vocab-size", type=int)
    p.add_argument("--min-count", type=int)
    p.add_argument("--embeddings", help="word2vec-style text embedding file")
    p.add_argument("--embedding-dim", type=int, choices=[50, 100, 300])
    p.add_argument("--lam", type=float, help="L2 strength (default 1/n_samples)")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-epochs", type=int)


def build_parser() -> argparse.ArgumentParser:
    shared = _shared()
    parser = argparse.ArgumentParser(prog="sentibench", description="Polarity benchmarks for Brazilian Portuguese review datasets.")
    parser.add_argument("--version", action="version", version=f"sentibench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", parents=[shared], help="ingest raw CSVs into a consolidated tokenized CSV")
    p.add_argument("--input", action="append", required=True, metavar="DATASET=PATH")
    p.add_argument("--col-text")
    p.add_argument("--col-rating")
    p.add_argument("--col-id")
    p.add_argument("--col-fold", help="take published folds from this column instead of partitioning")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("partition", parents=[shared], help="assign stratified folds 1..10")
    p.add_argument("consolidated")
    p.add_argument("--stratify", choices=["rating", "polarity"])
    p.add_argument("--output", help="defaults to rewriting the input file")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("stats", parents=[shared], help="descriptive statistics per dataset")
    p.add_argument("consolidated")
    p.add_argument("--min-count", type=int)
    p.add_argument("--report")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", parents=[shared], help="train a polarity model on folds 1-9")
    p.add_argument("consolidated")
    p.add_argument("--dataset", default="all")
    p.add_argument("--features", choices=["tfidf", "embedding"])
    _model_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[shared], help="ROC-AUC of a saved model on one split")
    p.add_argument("consolidated")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", default="all")
    p.add_argument("--split", choices=["train", "validation", "test"], default="test")
    p.add_argument("--embeddings")
    p.add_argument("--embedding-dim", type=int, choices=[50, 100, 300])
    p.add_argument("--report")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", parents=[shared], help="ROC-AUC per tf-idf vocabulary size")
    p.add_argument("consolidated")
    p.add_argument("--dataset", default="all")
    p.add_argument("--sizes", default="50,100,300,1000,5000,10000,25000,50000,75000,100000,250000,500000")
    _model_flags(p)
    p.add_argument("--report")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cross-eval", parents=[shared], help="train-on-one, test-on-every matrix with delta row")
    p.add_argument("consolidated")
    p.add_argument("--datasets", help="comma-separated dataset names (default: all present)")
    p.add_argument("--all-column", action="store_true", help="also evaluate on the concatenated test folds")
    _model_flags(p)
    p.add_argument("--report")
    p.set_defaults(func=cmd_crosseval)

    p = sub.add_parser("report", parents=[shared], help="render a JSON report as a table")
    p.add_argument("report_file")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.INFO),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)
    try:
        resolved = resolve(args)
        logger.info("resolved config for %s: %s", args.command, json.dumps(resolved, sort_keys=True))
        return args.func(args, resolved)
    except SentibenchError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
