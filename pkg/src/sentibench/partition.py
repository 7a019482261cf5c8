"""Stratified 10-fold assignment and the train/validation/test convention.

Folds 1-8 are training, fold 9 validation, fold 10 test. Within every
(dataset, stratum) group the members are shuffled with xoshiro256** (seeded by
SplitMix64 from ``seed`` xor a stable group hash) using Fisher-Yates, then
dealt round-robin starting at fold ``group_hash % 10 + 1``.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, replace
from typing import Mapping, Optional

from . import kernels
from .corpus import Corpus, Review
from .errors import PreconditionError

N_FOLDS = 10
TRAIN_FOLDS = frozenset(range(1, 9))
VALIDATION_FOLD = 9
TEST_FOLD = 10

_MASK64 = (1 << 64) - 1


class StratifyKey(enum.Enum):
    RATING = "rating"
    POLARITY = "polarity"


@dataclass(frozen=True)
class FoldAssignment:
    folds: Mapping[str, int]
    seed: int
    stratify_key: StratifyKey

    def __len__(self):
        return len(self.folds)


def group_hash(dataset: str, stratum: str) -> int:
    digest = hashlib.blake2b(f"{dataset}|{stratum}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stratum_of(review: Review, key: StratifyKey) -> str:
    if key is StratifyKey.POLARITY and review.polarity is not None:
        return f"polarity={review.polarity}"
    # 3-star reviews have no polarity; they are folded by their rating stratum.
    return f"rating={review.rating}"


def assign_folds(corpus: Corpus, seed: int, stratify_key: StratifyKey | str = StratifyKey.RATING) -> FoldAssignment:
    if len(corpus) == 0:
        raise PreconditionError("cannot assign folds to an empty corpus")
    key = StratifyKey(stratify_key)
    groups: dict[tuple[str, str], list[str]] = {}
    for r in corpus.reviews:
        groups.setdefault((r.dataset.value, stratum_of(r, key)), []).append(r.id)
    folds: dict[str, int] = {}
    for (dataset, stratum), ids in groups.items():
        h = group_hash(dataset, stratum)
        state = kernels.seed_state((seed ^ h) & _MASK64)
        perm = kernels.fisher_yates(len(ids), state)
        start = h % N_FOLDS
        for k, pos in enumerate(perm):
            folds[ids[pos]] = (start + k) % N_FOLDS + 1
    return FoldAssignment(folds, seed, key)


def apply_assignment(corpus: Corpus, assignment: FoldAssignment) -> Corpus:
    missing = [r.id for r in corpus.reviews if r.id not in assignment.folds]
    if missing:
        raise PreconditionError(f"reviews missing from fold assignment: {missing[:5]}")
    return corpus.with_reviews(replace(r, fold=assignment.folds[r.id]) for r in corpus.reviews)


def split(corpus: Corpus, assignment: Optional[FoldAssignment] = None) -> tuple[Corpus, Corpus, Corpus]:
    """Return ``(train, validation, test)`` from an assignment or the reviews' own folds."""
    train, val, test = [], [], []
    for r in corpus.reviews:
        fold = assignment.folds.get(r.id) if assignment is not None else r.fold
        if fold is None:
            raise PreconditionError(f"review {r.id} has no fold")
        if fold in TRAIN_FOLDS:
            train.append(r)
        elif fold == VALIDATION_FOLD:
            val.append(r)
        elif fold == TEST_FOLD:
            test.append(r)
        else:
            raise PreconditionError(f"review {r.id} has fold {fold} outside 1..10")
    name = corpus.name
    return (
        corpus.with_reviews(train, f"{name}/train"),
        corpus.with_reviews(val, f"{name}/validation"),
        corpus.with_reviews(test, f"{name}/test"),
    )


def development_and_test(corpus: Corpus) -> tuple[Corpus, Corpus]:
    """Training and validation folds concatenated, plus the test fold."""
    train, val, test = split(corpus)
    return corpus.with_reviews(train.reviews + val.reviews, f"{corpus.name}/dev"), test


def fold_counts(corpus: Corpus, key: StratifyKey | str = StratifyKey.RATING) -> dict[tuple[str, str], list[int]]:
    """Per (dataset, stratum) group, the number of reviews in folds 1..10."""
    key = StratifyKey(key)
    table: dict[tuple[str, str], list[int]] = {}
    for r in corpus.reviews:
        if r.fold is None:
            raise PreconditionError(f"review {r.id} has no fold")
        row = table.setdefault((r.dataset.value, stratum_of(r, key)), [0] * N_FOLDS)
        row[r.fold - 1] += 1
    return table


def is_balanced(counts: dict[tuple[str, str], list[int]]) -> bool:
    """True when every group's fold counts are within one of its proportional share."""
    for row in counts.values():
        share = sum(row) / N_FOLDS
        if any(abs(c - share) > 1 for c in row):
            return False
    return True
