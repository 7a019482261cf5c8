"""ROC-AUC, descriptive corpus statistics, vocabulary sweeps and cross-dataset evaluation."""

from __future__ import annotations

import logging
import statistics
from dataclasses import asdict, dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from . import kernels
from .corpus import Corpus, filter_polarity_task
from .errors import DomainError, PreconditionError
from .model import LinearModel, predict_scores, train
from .partition import development_and_test, split
from .vectorize import EmbeddingFeaturizer, EmbeddingTable, TfidfMode, eligible_words, fit_tfidf
from .vocab import (
    DEFAULT_MIN_COUNT,
    MAX_VOCAB_SIZE,
    Vocabulary,
    build_vocabulary,
    count_ngrams,
    rank_candidates,
    vocab_overlap,
    vocabulary_from_docs,
)

logger = logging.getLogger(__name__)

ALL_COMBINED = "All combined"
ALL_COLUMN = "All"


def roc_auc(scores: Sequence[float], labels: Sequence[int], split_name: str = "") -> float:
    """Area under the ROC curve, ties credited one half (Mann-Whitney U / (P * N))."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    where = f" in split {split_name!r}" if split_name else ""
    if s.shape != y.shape or s.ndim != 1:
        raise PreconditionError(f"scores and labels must be 1-D of equal length{where}")
    if not np.all((y == 0) | (y == 1)):
        raise PreconditionError(f"labels must be 0/1{where}")
    if np.isnan(s).any():
        raise PreconditionError(f"scores contain NaN{where}")
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == y.shape[0]:
        raise DomainError(f"ROC-AUC needs both classes{where}; got {n_pos} positives of {y.shape[0]}")
    order = np.argsort(s, kind="stable")
    return float(kernels.auc_sorted(np.ascontiguousarray(s[order]), np.ascontiguousarray(y[order])))


# --- descriptive statistics -------------------------------------------------


def _pct(counts: Mapping, total: int) -> dict:
    return {str(k): (100.0 * v / total if total else 0.0) for k, v in counts.items()}


def corpus_stats(corpus: Corpus, min_count: int = DEFAULT_MIN_COUNT) -> dict:
    """Sample counts per split, token-length summary, vocabulary sizes and label shares."""
    docs = corpus.token_lists
    lengths = [len(t) for t in docs]
    out: dict = {"name": corpus.name, "n_reviews": len(corpus)}
    if lengths:
        out["mean_length"] = float(np.mean(lengths))
        out["median_length"] = float(statistics.median(lengths))
    else:
        out["mean_length"] = out["median_length"] = 0.0

    if corpus.reviews and all(r.fold is not None for r in corpus.reviews):
        samples = {}
        for task, part in (("rating", corpus), ("polarity", filter_polarity_task(corpus))):
            tr, va, te = split(part)
            samples[task] = {"train": len(tr), "validation": len(va), "test": len(te)}
        out["samples"] = samples

    c1 = count_ngrams(docs, (1, 1))
    c12 = count_ngrams(docs, (1, 2))
    out["vocab_size_1gram"] = sum(1 for tf, _ in c1.values() if tf > min_count)
    out["vocab_size_1_2gram"] = sum(1 for tf, _ in c12.values() if tf > min_count)
    out["vocab_size_1gram_unfiltered"] = len(c1)
    out["vocab_size_1_2gram_unfiltered"] = len(c12)
    out["vocab_size_1_3gram"] = len(rank_candidates(count_ngrams(docs, (1, 3)), min_count))

    ratings = {k: 0 for k in range(1, 6)}
    polarity = {0: 0, 1: 0}
    for r in corpus.reviews:
        ratings[r.rating] += 1
        if r.polarity is not None:
            polarity[r.polarity] += 1
    out["label_distribution"] = {
        "rating": _pct(ratings, len(corpus)),
        "polarity": _pct(polarity, sum(polarity.values())),
    }
    return out


def dataset_stats(corpus: Corpus, min_count: int = DEFAULT_MIN_COUNT) -> dict:
    """``corpus_stats`` for every dataset present plus the combined corpus."""
    out = {}
    for ds in corpus.datasets():
        out[ds.display] = corpus_stats(corpus.by_dataset(ds), min_count)
    out[ALL_COMBINED] = corpus_stats(corpus.with_reviews(corpus.reviews, ALL_COMBINED), min_count)
    return out


@dataclass
class OverlapMatrix:
    """``cells[i][j]``: percentage of dataset j's vocabulary that is contained in dataset i's.

    Row and column averages leave out the diagonal.
    """

    names: list[str]
    cells: list[list[float]]
    row_avg: list[float]
    col_avg: list[float]

    def as_dict(self) -> dict:
        return asdict(self)


def overlap_matrix(vocabularies: Mapping[str, Vocabulary]) -> OverlapMatrix:
    names = list(vocabularies)
    if len(names) < 2:
        raise PreconditionError("overlap matrix needs at least two vocabularies")
    vs = [vocabularies[n] for n in names]
    k = len(names)
    cells = [[100.0 if i == j else vocab_overlap(vs[j], vs[i]) for j in range(k)] for i in range(k)]
    row_avg = [sum(cells[i][j] for j in range(k) if j != i) / (k - 1) for i in range(k)]
    col_avg = [sum(cells[i][j] for i in range(k) if i != j) / (k - 1) for j in range(k)]
    return OverlapMatrix(names, cells, row_avg, col_avg)


def word_overlap_matrix(corpus: Corpus, min_count: int = DEFAULT_MIN_COUNT) -> OverlapMatrix:
    """1-gram overlap between the datasets present in ``corpus``."""
    vocabs = {}
    for ds in corpus.datasets():
        docs = corpus.by_dataset(ds).token_lists
        vocabs[ds.display] = vocabulary_from_docs(docs, (1, 1), min_count, max_size=10**9)
    return overlap_matrix(vocabs)


# --- classifier pipeline ----------------------------------------------------


@dataclass(frozen=True)
class ClassifierConfig:
    features: str = "tfidf"
    tfidf_mode: str = "smoothed_l2"
    ngram_range: tuple[int, int] = (1, 3)
    vocab_size: int = MAX_VOCAB_SIZE
    min_count: int = DEFAULT_MIN_COUNT
    lam: Optional[float] = None
    tol: float = 1e-4
    max_epochs: int = 1000
    seed: int = 0
    threads: int = field(default=1, compare=False)

    def __post_init__(self):
        if self.features not in ("tfidf", "embedding"):
            raise PreconditionError(f"unknown feature kind {self.features!r}")
        object.__setattr__(self, "tfidf_mode", TfidfMode.parse(self.tfidf_mode).value)
        object.__setattr__(self, "ngram_range", tuple(self.ngram_range))
        if not 1 <= self.vocab_size <= MAX_VOCAB_SIZE:
            raise PreconditionError(f"vocab_size must be in 1..{MAX_VOCAB_SIZE}, got {self.vocab_size}")

    def as_dict(self) -> dict:
        """Resolved settings for reports; the thread count is left out since it cannot change results."""
        d = asdict(self)
        d.pop("threads")
        d["ngram_range"] = list(self.ngram_range)
        return d


@dataclass
class Pipeline:
    featurizer: object
    model: LinearModel

    def scores(self, corpus: Corpus) -> np.ndarray:
        return predict_scores(self.model, self.featurizer.transform_many(corpus.token_lists))


def _train_on(X, corpus: Corpus, featurizer, config: ClassifierConfig) -> Pipeline:
    space = featurizer.to_dict()
    space["dims"] = featurizer.dims
    model = train(
        X,
        corpus.labels,
        lam=config.lam,
        tol=config.tol,
        max_epochs=config.max_epochs,
        seed=config.seed,
        threads=config.threads,
        feature_space=space,
    )
    return Pipeline(featurizer, model)


def fit_pipeline(
    corpus: Corpus,
    config: ClassifierConfig,
    embeddings: Optional[EmbeddingTable] = None,
    counts: Optional[Mapping[str, tuple[int, int]]] = None,
) -> Pipeline:
    """Fit features and a logistic model on a polarity-labelled development corpus."""
    corpus = filter_polarity_task(corpus)
    if not corpus.reviews:
        raise DomainError(f"corpus {corpus.name!r} has no polarity-labelled reviews")
    docs = corpus.token_lists
    if config.features == "tfidf":
        if counts is None:
            counts = count_ngrams(docs, config.ngram_range)
        vocab = build_vocabulary(counts, len(docs), config.min_count, config.vocab_size, config.ngram_range)
        featurizer = fit_tfidf(vocab, config.tfidf_mode)
    else:
        if embeddings is None:
            raise PreconditionError("embedding features need an embedding table")
        featurizer = EmbeddingFeaturizer(embeddings, eligible_words(docs, config.min_count))
    X = featurizer.transform_many(docs)
    return _train_on(X, corpus, featurizer, config)


@dataclass
class EvalReport:
    dataset: str
    split: str
    roc_auc: float
    n_samples: int
    model_descriptor: str

    def __post_init__(self):
        if not 0.0 <= self.roc_auc <= 100.0:
            raise PreconditionError(f"roc_auc percent out of range: {self.roc_auc}")

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate(pipeline: Pipeline, corpus: Corpus, dataset: str, split_name: str = "test") -> EvalReport:
    corpus = filter_polarity_task(corpus)
    scores = pipeline.scores(corpus)
    auc = roc_auc(scores, corpus.labels, f"{dataset}/{split_name}")
    return EvalReport(dataset, split_name, 100.0 * auc, len(corpus), pipeline.model.descriptor)


# --- vocabulary-size sweep --------------------------------------------------


@dataclass
class SweepPoint:
    requested_size: int
    vocab_size: int
    report: EvalReport

    def as_dict(self) -> dict:
        return {"requested_size": self.requested_size, "vocab_size": self.vocab_size, **self.report.as_dict()}


def sweep_vocab_sizes(corpus: Corpus, sizes: Sequence[int], config: ClassifierConfig, name: str = "") -> list[SweepPoint]:
    """Train and test one tf-idf + LR model per vocabulary size.

    The vocabulary is always built on training+validation folds and evaluated on
    the test fold. Sizes above the number of eligible n-grams are clamped.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes) or any(s < 1 or s > MAX_VOCAB_SIZE for s in sizes):
        raise PreconditionError(f"sizes must be ascending within 1..{MAX_VOCAB_SIZE}: {sizes}")
    name = name or corpus.name
    dev, test = development_and_test(filter_polarity_task(corpus))
    counts = count_ngrams(dev.token_lists, config.ngram_range)
    available = len(rank_candidates(counts, config.min_count))
    points = []
    for size in sizes:
        effective = min(size, available)
        if effective < size:
            logger.warning("%s: requested vocabulary %d exceeds the %d eligible n-grams; clamped", name, size, available)
        cfg = _replace(config, features="tfidf", vocab_size=max(effective, 1))
        pipe = fit_pipeline(dev, cfg, counts=counts)
        points.append(SweepPoint(size, pipe.featurizer.dims, evaluate(pipe, test, name)))
    return points


def _replace(config: ClassifierConfig, **changes) -> ClassifierConfig:
    d = asdict(config)
    d.update(changes)
    return ClassifierConfig(**d)


# --- cross-dataset evaluation ----------------------------------------------


@dataclass
class CrossEvalMatrix:
    train_names: list[str]
    eval_names: list[str]
    grid: list[list[float]]
    delta: dict[str, float]
    n_test: dict[str, int] = field(default_factory=dict)

    def cell(self, train_name: str, eval_name: str) -> float:
        return self.grid[self.train_names.index(train_name)][self.eval_names.index(eval_name)]

    def recompute_delta(self) -> dict[str, float]:
        if len(self.train_names) == 1:
            # With one dataset the combined model is that dataset's model.
            only = self.train_names[0]
            return {only: self.cell(only, only) - self.cell(only, only)}
        return {
            d: self.cell(ALL_COMBINED, d) - self.cell(d, d)
            for d in self.eval_names
            if d in self.train_names and d != ALL_COMBINED
        }

    def as_dict(self) -> dict:
        return asdict(self)


def cross_eval(
    datasets: Mapping[str, Corpus],
    config: ClassifierConfig,
    include_all_column: bool = False,
) -> CrossEvalMatrix:
    """Train one tf-idf + LR model per dataset plus an all-combined model; test each on every test fold.

    Rows are training datasets, columns evaluation datasets. ``delta[d]`` is
    the all-combined model's AUC on ``d`` minus the model trained on ``d``.
    """
    if not datasets:
        raise PreconditionError("cross evaluation needs at least one dataset")
    names = list(datasets)
    devs, tests = {}, {}
    for n in names:
        devs[n], tests[n] = development_and_test(filter_polarity_task(datasets[n]))
    pipelines = {}
    for n in names:
        logger.info("cross-eval: training on %s (%d docs)", n, len(devs[n]))
        pipelines[n] = fit_pipeline(devs[n], _replace(config, features="tfidf"))
    eval_names = list(names)
    if len(names) > 1:
        combined_dev = Corpus(tuple(r for n in names for r in devs[n].reviews), ALL_COMBINED)
        logger.info("cross-eval: training on %s (%d docs)", ALL_COMBINED, len(combined_dev))
        pipelines[ALL_COMBINED] = fit_pipeline(combined_dev, _replace(config, features="tfidf"))
        if include_all_column:
            tests[ALL_COLUMN] = Corpus(tuple(r for n in names for r in tests[n].reviews), ALL_COLUMN)
            eval_names.append(ALL_COLUMN)
    train_names = list(pipelines)
    grid = [[evaluate(pipelines[t], tests[e], e).roc_auc for e in eval_names] for t in train_names]
    matrix = CrossEvalMatrix(train_names, eval_names, grid, {}, {e: len(tests[e]) for e in eval_names})
    matrix.delta = matrix.recompute_delta()
    return matrix
