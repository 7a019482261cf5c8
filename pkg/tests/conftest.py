import random

import pytest

from sentibench import _kernels_py, kernels
from sentibench.corpus import Corpus, Dataset, Review, assign_polarity
from sentibench.partition import apply_assignment, assign_folds
from sentibench.textprep import preprocess

try:
    from sentibench import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

BACKENDS = [pytest.param(_kernels_py, id="python")]
if _kernels_c is not None:
    BACKENDS.append(pytest.param(_kernels_c, id="compiled"))

POSITIVE = ["otimo", "excelente", "adorei", "perfeito", "recomendo"]
NEGATIVE = ["pessimo", "horrivel", "odiei", "defeito", "quebrado"]


def synthetic_corpus(n=1200, seed=0, dataset=Dataset.OLIST, noise_words=200, signal=1, folded=True, id_prefix=""):
    """Reviews whose polarity is signalled by class-indicative words amid noise."""
    rng = random.Random(seed)
    noise = [f"ruido{i}" for i in range(noise_words)]
    reviews = []
    for i in range(n):
        rating = rng.choice([1, 2, 3, 4, 5])
        pol = assign_polarity(rating)
        words = [rng.choice(noise) for _ in range(rng.randint(3, 12))]
        for _ in range(signal):
            if pol == 1:
                words.append(rng.choice(POSITIVE))
            elif pol == 0:
                words.append(rng.choice(NEGATIVE))
        rng.shuffle(words)
        text = " ".join(words)
        reviews.append(Review(f"{id_prefix}{i}", dataset, text, rating, pol, tokens=tuple(preprocess(text))))
    corpus = Corpus(tuple(reviews), dataset.display)
    if folded:
        corpus = apply_assignment(corpus, assign_folds(corpus, seed, "polarity"))
    return corpus


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """A kernel module; also routes the library's kernel calls through it."""
    for name in kernels.__all__:
        if name != "BACKEND":
            monkeypatch.setattr(kernels, name, getattr(request.param, name))
    return request.param


@pytest.fixture
def toy_corpus():
    return synthetic_corpus()
