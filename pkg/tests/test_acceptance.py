"""Acceptance gate: one PASS/FAIL line per criterion.

Criteria 1-7 need no external data. Criteria 8-13 read the public datasets and
pretrained embeddings from ``$SENTIBENCH_DATA_DIR``:

    $SENTIBENCH_DATA_DIR/consolidated.csv      output of ``sentibench prepare`` + ``partition``
    $SENTIBENCH_DATA_DIR/embeddings/fasttext*s50*.txt
    $SENTIBENCH_DATA_DIR/embeddings/fasttext*s300*.txt
    $SENTIBENCH_DATA_DIR/embeddings/word2vec*s300*.txt

and are skipped with a message when the directory is absent.
"""

import json
import math
import os
import random
from pathlib import Path

import numpy as np
import pytest

from conftest import synthetic_corpus
from sentibench.cli import main
from sentibench.corpus import Corpus, Dataset, Review, assign_polarity, read_consolidated
from sentibench.evaluation import (
    ALL_COLUMN,
    ALL_COMBINED,
    ClassifierConfig,
    cross_eval,
    dataset_stats,
    evaluate,
    fit_pipeline,
    roc_auc,
    sweep_vocab_sizes,
    word_overlap_matrix,
)
from sentibench.model import objective
from sentibench.partition import N_FOLDS, StratifyKey, apply_assignment, assign_folds, development_and_test, stratum_of
from sentibench.textprep import NormalizationConfig, load_stopwords, preprocess
from sentibench.vectorize import fit_tfidf, load_embeddings
from sentibench.vocab import vocabulary_from_docs

HERE = Path(__file__).parent


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
        assert ok, f"criterion {number}: {detail}"

    return emit


# --- no external data -------------------------------------------------------


def _brute_force_auc(scores, labels):
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    return wins / (len(pos) * len(neg))


def test_criterion_01_auc_matches_brute_force(report):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 501))
        scores = rng.normal(size=n)
        tie_pool = rng.choice(scores, size=max(1, n // 4))
        inject = rng.random(n) < 0.3
        scores[inject] = rng.choice(tie_pool, size=int(inject.sum()))
        labels = rng.integers(0, 2, size=n)
        labels[rng.choice(n, 2, replace=False)] = [0, 1]
        worst = max(worst, abs(roc_auc(scores, labels) - _brute_force_auc(scores, labels)))
    report(1, worst <= 1e-12, f"200 instances, max |auc - brute force| = {worst:.2e}")


def test_criterion_02_tfidf_hand_values(report):
    docs = [["bom", "produto"], ["bom", "bom"], ["ruim"]]
    vocab = vocabulary_from_docs(docs, (1, 1), min_count=0)
    raw = fit_tfidf(vocab, "raw_eq1")
    col = vocab.index
    expected = [
        {col["bom"]: math.log(3 / 2), col["produto"]: math.log(3)},
        {col["bom"]: 2 * math.log(3 / 2)},
        {col["ruim"]: math.log(3)},
    ]
    worst = 0.0
    for doc, exp in zip(docs, expected):
        got = raw.transform(doc).as_dict()
        assert got.keys() == exp.keys()
        worst = max(worst, *(abs(got[k] - v) for k, v in exp.items()))
    # Two documents, term in one of them: idf = ln 2; in both: 0.
    two = fit_tfidf(vocabulary_from_docs([["bom", "bom"], ["ok"]], (1, 1), min_count=0), "raw_eq1")
    worst = max(worst, abs(two.idf[two.vocabulary.index["bom"]] - math.log(2)))
    worst = max(worst, abs(two.transform(["bom", "bom"]).as_dict()[two.vocabulary.index["bom"]] - 2 * math.log(2)))
    both = fit_tfidf(vocabulary_from_docs([["bom"], ["bom"]], (1, 1), min_count=0), "raw_eq1")
    worst = max(worst, abs(both.idf[0]))
    smooth = fit_tfidf(vocabulary_from_docs([["bom"], ["bom"]], (1, 1), min_count=0), "smoothed_l2")
    worst = max(worst, abs(smooth.idf[0] - 1.0))

    corpus = synthetic_corpus(300, seed=11)
    sm = fit_tfidf(vocabulary_from_docs(corpus.token_lists, (1, 3)), "smoothed_l2")
    X = sm.transform_many(corpus.token_lists)
    norms = [X.row(i).norm() for i in range(X.n_rows)]
    norm_err = max(abs(n - 1.0) for n in norms if n > 0)
    ok = worst <= 1e-12 and norm_err <= 1e-12
    report(2, ok, f"hand values max error {worst:.2e}; smoothed max |norm - 1| = {norm_err:.2e}")


def test_criterion_03_gradient_check(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    h = 1e-5
    for _ in range(20):
        n, d = int(rng.integers(5, 51)), int(rng.integers(1, 21))
        X = rng.normal(size=(n, d))
        y = rng.integers(0, 2, size=n)
        w, b, lam = rng.normal(size=d), float(rng.normal()), float(rng.uniform(0, 0.5))
        _, gw, gb = objective(X, y, w, b, lam)
        analytic = np.append(gw, gb)
        numeric = np.empty(d + 1)
        for k in range(d + 1):
            e = np.zeros(d + 1)
            e[k] = h
            fp = objective(X, y, w + e[:d], b + e[d], lam)[0]
            fm = objective(X, y, w - e[:d], b - e[d], lam)[0]
            numeric[k] = (fp - fm) / (2 * h)
        rel = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-300)
        worst = max(worst, rel)
    report(3, worst < 1e-5, f"20 problems, max relative error {worst:.2e}")


def test_criterion_04_stratification(report):
    rng = random.Random(99)
    datasets = list(Dataset)
    worst = 0.0
    for trial in range(100):
        n = rng.randint(1, 600)
        reviews = []
        for i in range(n):
            rating = rng.choices([1, 2, 3, 4, 5], weights=[rng.random() + 0.01 for _ in range(5)])[0]
            ds = rng.choice(datasets[: rng.randint(1, 5)])
            reviews.append(Review(str(i), ds, "texto", rating, assign_polarity(rating)))
        corpus = Corpus(tuple(reviews), "random")
        key = rng.choice(list(StratifyKey))
        folded = apply_assignment(corpus, assign_folds(corpus, rng.randrange(2**63), key))
        groups = {}
        for r in folded.reviews:
            groups.setdefault((r.dataset, stratum_of(r, key)), [0] * N_FOLDS)[r.fold - 1] += 1
        for row in groups.values():
            share = sum(row) / N_FOLDS
            worst = max(worst, max(abs(c - share) for c in row))
    report(4, worst <= 1, f"100 corpora, max deviation from proportional share {worst:.2f}")


def _write_raw(path, n, seed):
    rng = random.Random(seed)
    lines = ["review_text,rating"]
    for _ in range(n):
        rating = rng.randint(1, 5)
        words = [f"palavra{rng.randint(0, 60)}" for _ in range(rng.randint(3, 10))]
        if rating != 3:
            words.append(rng.choice(["otimo", "excelente"] if rating > 3 else ["pessimo", "horrivel"]))
        lines.append(f"{' '.join(words)},{rating}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _pipeline_outputs(root: Path, threads: str) -> dict:
    root.mkdir()
    a = _write_raw(root.parent / "olist_raw.csv", 500, 1) if not (root.parent / "olist_raw.csv").exists() \
        else root.parent / "olist_raw.csv"
    b = _write_raw(root.parent / "b2w_raw.csv", 500, 2) if not (root.parent / "b2w_raw.csv").exists() \
        else root.parent / "b2w_raw.csv"
    csv_path, model, tr, ev, st = (root / f for f in ("c.csv", "m.json", "train.json", "eval.json", "stats.json"))
    t = ["--threads", threads, "--seed", "5"]
    assert main(["prepare", "--input", f"olist={a}", "--input", f"b2w={b}", "--output", str(csv_path)] + t) == 0
    assert main(["partition", str(csv_path)] + t) == 0
    assert main(["stats", str(csv_path), "--report", str(st)] + t) == 0
    assert main(["train", str(csv_path), "--model", str(model), "--report", str(tr), "--max-epochs", "300"] + t) == 0
    assert main(["eval", str(csv_path), "--model", str(model), "--report", str(ev)] + t) == 0
    return {p.name: p.read_bytes() for p in (csv_path, model, tr, ev, st)}


def test_criterion_05_determinism(report, tmp_path, capsys):
    runs = [_pipeline_outputs(tmp_path / name, threads) for name, threads in (("a", "1"), ("b", "1"), ("c", "4"))]
    capsys.readouterr()
    same = runs[0] == runs[1] == runs[2]
    diff = [k for k in runs[0] if not (runs[0][k] == runs[1][k] == runs[2][k])]
    report(5, same, f"{len(runs[0])} artifacts byte-identical over 2 runs and --threads 1/4" if same
           else f"differing artifacts: {diff}")


def test_criterion_06_synthetic_end_to_end(report):
    corpus = synthetic_corpus(4000, seed=21, noise_words=60)
    dev, test = development_and_test(corpus)
    pipe = fit_pipeline(dev, ClassifierConfig(vocab_size=1000))
    rep = evaluate(pipe, test, "synthetic")
    report(6, rep.roc_auc / 100 >= 0.99 and pipe.featurizer.dims == 1000,
           f"tf-idf({pipe.featurizer.dims}) + LR test ROC-AUC {rep.roc_auc / 100:.4f} on {rep.n_samples} reviews")


def test_criterion_07_tokenizer_golden(report):
    cases = json.loads((HERE / "data" / "tokenizer_golden.json").read_text(encoding="utf-8"))
    cfg = NormalizationConfig(stopword_set=frozenset(load_stopwords()))
    bad = [c["input"] for c in cases if preprocess(c["input"], cfg) != c["tokens"]]
    report(7, len(cases) == 50 and not bad, f"{len(cases) - len(bad)}/{len(cases)} golden strings reproduced")


# --- public datasets --------------------------------------------------------

DATA_DIR = os.environ.get("SENTIBENCH_DATA_DIR")
needs_data = pytest.mark.skipif(
    not DATA_DIR or not (Path(DATA_DIR) / "consolidated.csv").is_file(),
    reason="SENTIBENCH_DATA_DIR with consolidated.csv not available; published-number criteria 8-13 skipped",
)
DATASET_ORDER = ["Olist", "Buscape", "B2W", "UTLCApps", "UTLCMovies"]


@pytest.fixture(scope="module")
def full_corpus():
    return read_consolidated(Path(DATA_DIR) / "consolidated.csv")


@pytest.fixture(scope="module")
def full_config():
    return ClassifierConfig(threads=os.cpu_count() or 1)


@pytest.fixture(scope="module")
def cross_matrix(full_corpus, full_config):
    present = {ds.display: ds for ds in full_corpus.datasets()}
    parts = {n: full_corpus.by_dataset(present[n]) for n in DATASET_ORDER if n in present}
    return cross_eval(parts, full_config, include_all_column=True)


@needs_data
def test_criterion_08_cross_eval_diagonal(report, cross_matrix):
    target = {"Olist": 96.5, "Buscape": 91.4, "B2W": 98.2, "UTLCApps": 96.0, "UTLCMovies": 93.1}
    got = {d: cross_matrix.cell(d, d) for d in target if d in cross_matrix.train_names}
    got["All"] = cross_matrix.cell(ALL_COMBINED, ALL_COLUMN)
    target["All"] = 95.1
    ok = len(got) == 6 and all(abs(got[d] - target[d]) <= 1.5 for d in got)
    report(8, ok, ", ".join(f"{d} {got[d]:.1f} (target {target[d]})" for d in got))


@needs_data
def test_criterion_09_off_diagonal(report, cross_matrix):
    a = cross_matrix.cell("Buscape", "Olist")
    b = cross_matrix.cell("Olist", "UTLCMovies")
    ok = abs(a - 91.6) <= 2.0 and abs(b - 66.7) <= 3.0
    report(9, ok, f"Buscape->Olist {a:.1f} (target 91.6 +-2.0), Olist->UTLCMovies {b:.1f} (target 66.7 +-3.0)")


@needs_data
def test_criterion_10_delta_row(report, cross_matrix):
    delta = cross_matrix.delta
    ok = len(delta) == 5 and all(-1.0 <= v <= 0.0 for v in delta.values())
    report(10, ok, ", ".join(f"{d} {v:+.2f}" for d, v in delta.items()))


@needs_data
def test_criterion_11_vocab_sweep(report, full_corpus, full_config):
    pts = sweep_vocab_sizes(full_corpus.by_dataset(Dataset.B2W), [50, 5000, 10000, 500000], full_config, "B2W")
    auc = {p.requested_size: p.report.roc_auc for p in pts}
    rise, plateau = auc[5000] - auc[50], auc[500000] - auc[10000]
    report(11, rise >= 3.0 and plateau <= 1.0,
           f"AUC(5000)-AUC(50) = {rise:.2f} (>= 3), AUC(max)-AUC(10000) = {plateau:.2f} (<= 1)")


@needs_data
def test_criterion_12_descriptive_statistics(report, full_corpus):
    lengths = {"Olist": (7, 6), "Buscape": (25, 17), "B2W": (14, 10), "UTLCApps": (7, 5),
               "UTLCMovies": (21, 10), ALL_COMBINED: (15, 7)}
    labels = {
        "Olist": [22.0, 5.3, 8.8, 14.5, 49.4, 30.0, 70.0],
        "Buscape": [3.7, 4.3, 13.4, 39.5, 39.1, 9.2, 90.8],
        "B2W": [20.7, 6.3, 12.3, 24.4, 36.2, 30.8, 69.2],
        "UTLCApps": [16.4, 4.5, 6.8, 11.4, 60.8, 22.5, 77.5],
        "UTLCMovies": [2.4, 6.8, 20.0, 36.7, 34.0, 11.6, 88.4],
        ALL_COMBINED: [8.9, 5.8, 14.4, 26.4, 44.5, 17.2, 82.8],
    }
    stats = dataset_stats(full_corpus)
    failures = []
    for name, (mean, median) in lengths.items():
        s = stats[name]
        if abs(s["mean_length"] - mean) > 1 or abs(s["median_length"] - median) > 1:
            failures.append(f"{name} length {s['mean_length']:.1f}/{s['median_length']:.1f} vs {mean}/{median}")
        dist = s["label_distribution"]
        got = [dist["rating"][k] for k in "12345"] + [dist["polarity"]["0"], dist["polarity"]["1"]]
        for lab, g, e in zip(["1", "2", "3", "4", "5", "pol0", "pol1"], got, labels[name]):
            if abs(g - e) > 0.5:
                failures.append(f"{name} label {lab} {g:.1f}% vs {e}%")
    overlap = word_overlap_matrix(full_corpus)
    olist_avg = overlap.row_avg[overlap.names.index("Olist")]
    if abs(olist_avg - 15.5) > 1.5:
        failures.append(f"Olist overlap row average {olist_avg:.1f} vs 15.5")
    report(12, not failures, "; ".join(failures) if failures else
           f"lengths, label shares and Olist overlap row average ({olist_avg:.1f}) within tolerance")


def _embedding_file(pattern):
    found = sorted((Path(DATA_DIR) / "embeddings").glob(pattern))
    if not found:
        pytest.skip(f"no embedding file matching embeddings/{pattern}")
    return found[0]


@needs_data
def test_criterion_13_embedding_ordering(report, full_corpus, full_config):
    files = {
        "ft50": _embedding_file("fasttext*s50*.txt"),
        "ft300": _embedding_file("fasttext*s300*.txt"),
        "w2v300": _embedding_file("word2vec*s300*.txt"),
    }
    cfg = ClassifierConfig(features="embedding", threads=full_config.threads)
    auc = {}
    for key, path in files.items():
        table = load_embeddings(path)
        for ds in (Dataset.OLIST, Dataset.B2W):
            dev, test = development_and_test(full_corpus.by_dataset(ds))
            auc[(ds.display, key)] = evaluate(fit_pipeline(dev, cfg, embeddings=table), test, ds.display).roc_auc
        del table
    ok = all(auc[(d, "ft300")] > auc[(d, "ft50")] and auc[(d, "ft300")] > auc[(d, "w2v300")] for d in ("Olist", "B2W"))
    report(13, ok, ", ".join(f"{d}/{k} {v:.1f}" for (d, k), v in auc.items()))
