import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import synthetic_corpus
from sentibench.corpus import Corpus, Dataset, Review
from sentibench.errors import DomainError, PreconditionError
from sentibench.evaluation import (
    ALL_COLUMN,
    ALL_COMBINED,
    ClassifierConfig,
    CrossEvalMatrix,
    corpus_stats,
    cross_eval,
    evaluate,
    fit_pipeline,
    overlap_matrix,
    roc_auc,
    sweep_vocab_sizes,
    word_overlap_matrix,
)
from sentibench.model import sigmoid
from sentibench.partition import development_and_test
from sentibench.vocab import vocabulary_from_docs


def brute_force_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


class TestRocAuc:
    def test_worked_example(self, backend):
        assert roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75

    def test_all_ties(self, backend):
        assert roc_auc([0.3] * 6, [0, 1, 0, 1, 1, 0]) == 0.5

    def test_perfect_and_reversed(self, backend):
        assert roc_auc([1, 2, 3, 4], [0, 0, 1, 1]) == 1.0
        assert roc_auc([4, 3, 2, 1], [0, 0, 1, 1]) == 0.0

    def test_single_class_is_domain_error(self):
        with pytest.raises(DomainError, match="val"):
            roc_auc([0.1, 0.2], [1, 1], "val")

    def test_bad_inputs(self):
        with pytest.raises(PreconditionError):
            roc_auc([0.1, float("nan")], [0, 1])
        with pytest.raises(PreconditionError):
            roc_auc([0.1, 0.2], [0, 2])
        with pytest.raises(PreconditionError):
            roc_auc([0.1], [0, 1])

    @pytest.mark.parametrize("seed", range(25))
    def test_against_brute_force(self, seed, backend):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 500))
        scores = rng.integers(0, 20, size=n) / 7.0  # coarse grid forces ties
        labels = rng.integers(0, 2, size=n)
        labels[0], labels[1] = 0, 1
        assert abs(roc_auc(scores, labels) - brute_force_auc(scores, labels)) < 1e-12


@settings(deadline=None, max_examples=100)
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(0, 1)), min_size=2, max_size=60))
def test_auc_properties(pairs):
    scores = np.array([p[0] for p in pairs], dtype=float)
    labels = np.array([p[1] for p in pairs])
    if labels.min() == labels.max():
        return
    a = roc_auc(scores, labels)
    assert 0.0 <= a <= 1.0
    assert abs(a + roc_auc(-scores, labels) - 1.0) < 1e-12
    assert a == roc_auc(2 * scores + 1, labels)
    assert a == roc_auc(sigmoid(scores), labels)
    assert abs(a - brute_force_auc(scores, labels)) < 1e-12


def review(i, text, rating, fold=None, ds=Dataset.OLIST):
    pol = None if rating == 3 else int(rating >= 4)
    return Review(str(i), ds, text, rating, pol, fold, tuple(text.split()))


class TestCorpusStats:
    def test_toy(self):
        c = Corpus((review(0, "a b", 5), review(1, "c d", 1), review(2, "e f", 3)), "toy")
        s = corpus_stats(c, min_count=0)
        assert s["mean_length"] == 2.0 and s["median_length"] == 2.0
        assert s["vocab_size_1gram"] == 6 and s["vocab_size_1_2gram"] == 9
        dist = s["label_distribution"]
        assert dist["rating"]["5"] == pytest.approx(100 / 3)
        assert dist["polarity"] == {"0": 50.0, "1": 50.0}
        assert "samples" not in s

    def test_samples_per_split(self):
        c = synthetic_corpus(400, seed=2)
        s = corpus_stats(c)["samples"]
        assert sum(s["rating"].values()) == 400
        assert sum(s["polarity"].values()) == sum(1 for r in c.reviews if r.polarity is not None)
        assert s["polarity"]["train"] > s["polarity"]["test"] > 0

    def test_min_count_filter(self):
        c = Corpus(tuple(review(i, "x y" if i < 5 else "x", 5) for i in range(7)), "t")
        s = corpus_stats(c)
        assert s["vocab_size_1gram"] == 1 and s["vocab_size_1gram_unfiltered"] == 2


class TestOverlap:
    def test_layout_and_averages(self):
        a = vocabulary_from_docs([["w1", "w2", "w3", "w4"]], (1, 1), min_count=0)
        b = vocabulary_from_docs([["w1", "w2"]], (1, 1), min_count=0)
        c = vocabulary_from_docs([["w9"]], (1, 1), min_count=0)
        m = overlap_matrix({"A": a, "B": b, "C": c})
        # Row A holds the share of each column dataset's vocabulary found in A.
        assert m.cells[0][1] == 100.0 and m.cells[1][0] == 50.0
        assert m.cells[2][0] == 0.0
        assert all(m.cells[i][i] == 100.0 for i in range(3))
        assert m.row_avg[0] == 50.0 and m.col_avg[0] == 25.0

    def test_needs_two(self):
        with pytest.raises(PreconditionError):
            overlap_matrix({"A": vocabulary_from_docs([["a"]], (1, 1), min_count=0)})

    def test_from_corpus_bounds(self):
        merged = Corpus(synthetic_corpus(300, 1, Dataset.OLIST, id_prefix="o").reviews
                        + synthetic_corpus(300, 2, Dataset.B2W, id_prefix="b").reviews, "m")
        m = word_overlap_matrix(merged)
        assert m.names == ["Olist", "B2W"]
        assert all(0.0 <= v <= 100.0 for row in m.cells for v in row)


FAST = ClassifierConfig(max_epochs=300)


class TestPipeline:
    def test_separable_corpus_scores_high(self, toy_corpus):
        dev, test = development_and_test(toy_corpus)
        pipe = fit_pipeline(dev, FAST)
        rep = evaluate(pipe, test, "Olist")
        assert rep.roc_auc > 95.0 and rep.n_samples == len([r for r in test.reviews if r.polarity is not None])
        assert rep.model_descriptor == pipe.featurizer.descriptor

    def test_raw_mode_and_unigrams(self, toy_corpus):
        dev, test = development_and_test(toy_corpus)
        pipe = fit_pipeline(dev, ClassifierConfig(tfidf_mode="raw", ngram_range=(1, 1), max_epochs=300))
        assert evaluate(pipe, test, "Olist").roc_auc > 95.0

    def test_embedding_needs_table(self, toy_corpus):
        with pytest.raises(PreconditionError):
            fit_pipeline(toy_corpus, ClassifierConfig(features="embedding"))

    def test_config_validation(self):
        with pytest.raises(PreconditionError):
            ClassifierConfig(vocab_size=0)
        with pytest.raises(PreconditionError):
            ClassifierConfig(features="bow")
        assert "threads" not in ClassifierConfig(threads=8).as_dict()
        assert ClassifierConfig(threads=8) == ClassifierConfig(threads=1)


class TestSweep:
    def test_saturated_sizes_equal(self, caplog):
        c = synthetic_corpus(400, seed=3, noise_words=10)
        pts = sweep_vocab_sizes(c, [30, 500], ClassifierConfig(ngram_range=(1, 1), max_epochs=200))
        assert pts[0].vocab_size == pts[1].vocab_size <= 30
        assert pts[0].report.roc_auc == pts[1].report.roc_auc
        assert "clamped" in caplog.text

    def test_sizes_must_ascend(self, toy_corpus):
        with pytest.raises(PreconditionError):
            sweep_vocab_sizes(toy_corpus, [100, 10], FAST)
        with pytest.raises(PreconditionError):
            sweep_vocab_sizes(toy_corpus, [0], FAST)

    def test_vocab_sizes_grow(self):
        c = synthetic_corpus(600, seed=4)
        pts = sweep_vocab_sizes(c, [5, 50, 200], ClassifierConfig(max_epochs=100))
        assert [p.vocab_size for p in pts] == [5, 50, 200]


class TestCrossEval:
    def test_single_dataset(self, toy_corpus):
        m = cross_eval({"Olist": toy_corpus}, FAST)
        assert m.train_names == ["Olist"] and m.eval_names == ["Olist"]
        assert m.delta == {"Olist": 0.0}

    def test_two_datasets_shape_and_delta(self):
        a = synthetic_corpus(500, 5, Dataset.OLIST, id_prefix="o")
        b = synthetic_corpus(500, 6, Dataset.B2W, id_prefix="b")
        m = cross_eval({"Olist": a, "B2W": b}, FAST)
        assert m.train_names == ["Olist", "B2W", ALL_COMBINED]
        assert m.eval_names == ["Olist", "B2W"]
        assert len(m.grid) == 3 and all(len(r) == 2 for r in m.grid)
        for d in ("Olist", "B2W"):
            assert m.delta[d] == m.cell(ALL_COMBINED, d) - m.cell(d, d)
        wide = cross_eval({"Olist": a, "B2W": b}, FAST, include_all_column=True)
        assert wide.eval_names[-1] == ALL_COLUMN and wide.grid[0][:2] == m.grid[0]

    def test_recompute_delta(self):
        m = CrossEvalMatrix(["A", "B", ALL_COMBINED], ["A", "B"], [[90.0, 70.0], [60.0, 80.0], [91.5, 79.0]], {})
        assert m.recompute_delta() == pytest.approx({"A": 1.5, "B": -1.0})

    def test_empty(self):
        with pytest.raises(PreconditionError):
            cross_eval({}, FAST)
