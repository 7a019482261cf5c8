"""N-gram counting and frequency-pruned vocabularies."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import kernels
from .corpus import atomic_write_text
from .errors import ParseError, PreconditionError

logger = logging.getLogger(__name__)

MAX_VOCAB_SIZE = 500_000
DEFAULT_MIN_COUNT = 5


def _check_range(ngram_range: tuple[int, int]) -> tuple[int, int]:
    lo, hi = ngram_range
    if not 1 <= lo <= hi <= 3:
        raise PreconditionError(f"ngram range must satisfy 1 <= lo <= hi <= 3, got {ngram_range}")
    return int(lo), int(hi)


def count_ngrams(docs: Iterable[Sequence[str]], ngram_range: tuple[int, int] = (1, 3)) -> dict[str, tuple[int, int]]:
    """Return ``{ngram: (tf_total, df)}`` over all windows of length lo..hi."""
    lo, hi = _check_range(ngram_range)
    raw = kernels.count_ngrams(docs, lo, hi)
    return {gram: (tf, df) for gram, (tf, df) in raw.items()}


def merge_counts(*parts: Mapping[str, tuple[int, int]]) -> dict[str, tuple[int, int]]:
    """Associative merge of count maps from disjoint document shards."""
    out: dict[str, tuple[int, int]] = {}
    for part in parts:
        for gram, (tf, df) in part.items():
            prev = out.get(gram)
            out[gram] = (tf, df) if prev is None else (prev[0] + tf, prev[1] + df)
    return out


@dataclass(frozen=True)
class VocabEntry:
    ngram: str
    index: int
    df: int
    tf_total: int


@dataclass(frozen=True)
class Vocabulary:
    entries: tuple[VocabEntry, ...]
    n_documents: int
    ngram_range: tuple[int, int] = (1, 3)
    min_count: int = DEFAULT_MIN_COUNT
    max_size: int = MAX_VOCAB_SIZE
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {e.ngram: e.index for e in self.entries})

    def __len__(self):
        return len(self.entries)

    def __contains__(self, gram):
        return gram in self.index

    @property
    def ngrams(self) -> list[str]:
        return [e.ngram for e in self.entries]

    def save(self, path: str | os.PathLike) -> None:
        lo, hi = self.ngram_range
        lines = [
            f"# n_documents={self.n_documents} ngram_range={lo}..{hi} "
            f"min_count={self.min_count} max_size={self.max_size}"
        ]
        lines += [f"{e.ngram}\t{e.index}\t{e.df}\t{e.tf_total}" for e in self.entries]
        atomic_write_text(path, "\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline()
            if not header.startswith("#"):
                raise ParseError(f"{path}: missing '#' header line")
            try:
                meta = dict(item.split("=", 1) for item in header[1:].split())
                lo, hi = (int(x) for x in meta["ngram_range"].split(".."))
                n_documents = int(meta["n_documents"])
                min_count = int(meta["min_count"])
                max_size = int(meta["max_size"])
            except (KeyError, ValueError) as exc:
                raise ParseError(f"{path}: bad header {header.strip()!r}") from exc
            entries = []
            for line_no, line in enumerate(fh, start=2):
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 4:
                    raise ParseError(f"{path}: line {line_no}: expected 4 tab-separated fields")
                try:
                    entries.append(VocabEntry(parts[0], int(parts[1]), int(parts[2]), int(parts[3])))
                except ValueError as exc:
                    raise ParseError(f"{path}: line {line_no}: {exc}") from exc
        if [e.index for e in entries] != list(range(len(entries))):
            raise ParseError(f"{path}: indices are not dense 0..n-1 in order")
        return cls(tuple(entries), n_documents, (lo, hi), min_count, max_size)


def rank_candidates(counts: Mapping[str, tuple[int, int]], min_count: int = DEFAULT_MIN_COUNT) -> list[str]:
    """N-grams occurring more than ``min_count`` times, most frequent first, ties lexicographic."""
    kept = [g for g, (tf, _) in counts.items() if tf > min_count]
    kept.sort(key=lambda g: (-counts[g][0], g))
    return kept


def build_vocabulary(
    counts: Mapping[str, tuple[int, int]],
    n_documents: int,
    min_count: int = DEFAULT_MIN_COUNT,
    max_size: int = MAX_VOCAB_SIZE,
    ngram_range: tuple[int, int] = (1, 3),
) -> Vocabulary:
    if max_size < 1:
        raise PreconditionError(f"max_size must be >= 1, got {max_size}")
    ranked = rank_candidates(counts, min_count)[:max_size]
    if not ranked:
        logger.warning("vocabulary is empty: no n-gram occurs more than %d times", min_count)
    entries = tuple(VocabEntry(g, i, counts[g][1], counts[g][0]) for i, g in enumerate(ranked))
    return Vocabulary(entries, n_documents, tuple(ngram_range), min_count, max_size)


def vocabulary_from_docs(
    docs: Sequence[Sequence[str]],
    ngram_range: tuple[int, int] = (1, 3),
    min_count: int = DEFAULT_MIN_COUNT,
    max_size: int = MAX_VOCAB_SIZE,
) -> Vocabulary:
    counts = count_ngrams(docs, ngram_range)
    return build_vocabulary(counts, len(docs), min_count, max_size, ngram_range)


def vocab_overlap(a: Vocabulary | Iterable[str], b: Vocabulary | Iterable[str]) -> float:
    """Percentage of ``a``'s n-grams that also appear in ``b``."""
    grams_a = set(a.index) if isinstance(a, Vocabulary) else set(a)
    grams_b = set(b.index) if isinstance(b, Vocabulary) else set(b)
    if isinstance(a, Vocabulary) and isinstance(b, Vocabulary) and a.ngram_range != b.ngram_range:
        raise PreconditionError(f"ngram ranges differ: {a.ngram_range} vs {b.ngram_range}")
    if not grams_a:
        raise PreconditionError("overlap undefined for an empty vocabulary")
    return 100.0 * len(grams_a & grams_b) / len(grams_a)
