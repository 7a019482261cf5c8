"""Document representations: tf-idf sparse vectors and averaged word embeddings."""

from __future__ import annotations

import enum
import hashlib
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import FeatureSpaceMismatch, ParseError, PreconditionError
from .textprep import normalize_text
from .vocab import DEFAULT_MIN_COUNT, VocabEntry, Vocabulary, count_ngrams

logger = logging.getLogger(__name__)


class TfidfMode(enum.Enum):
    RAW_EQ1 = "raw_eq1"
    SMOOTHED_L2 = "smoothed_l2"

    @classmethod
    def parse(cls, value: "TfidfMode | str") -> "TfidfMode":
        if isinstance(value, cls):
            return value
        aliases = {"raw": cls.RAW_EQ1, "smoothed": cls.SMOOTHED_L2}
        return aliases.get(value) or cls(value)


@dataclass(frozen=True)
class SparseVector:
    dims: int
    indices: np.ndarray
    weights: np.ndarray
    space: str = ""

    def __post_init__(self):
        idx = self.indices
        if len(idx) != len(self.weights):
            raise PreconditionError("indices and weights differ in length")
        if len(idx) and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= self.dims):
            raise PreconditionError("sparse indices must be strictly increasing and < dims")

    def as_dict(self) -> dict[int, float]:
        return {int(i): float(w) for i, w in zip(self.indices, self.weights)}

    def norm(self) -> float:
        return math.sqrt(float(np.dot(self.weights, self.weights)))


@dataclass(frozen=True)
class DenseVector:
    values: np.ndarray
    space: str = ""

    @property
    def dims(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class CSRMatrix:
    """Row-compressed sparse matrix; ``space`` identifies the feature space it lives in."""

    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    n_cols: int
    space: str = ""

    @property
    def n_rows(self) -> int:
        return self.indptr.shape[0] - 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    def row(self, i: int) -> SparseVector:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return SparseVector(self.n_cols, self.indices[lo:hi], self.data[lo:hi], self.space)

    def toarray(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for i in range(self.n_rows):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            out[i, self.indices[lo:hi]] = self.data[lo:hi]
        return out

    @classmethod
    def from_dense(cls, array: np.ndarray, space: str = "") -> "CSRMatrix":
        array = np.asarray(array, dtype=np.float64)
        rows, cols = np.nonzero(array)
        indptr = np.concatenate(([0], np.cumsum(np.bincount(rows, minlength=array.shape[0])))).astype(np.int64)
        return cls(indptr, cols.astype(np.int64), array[rows, cols].copy(), array.shape[1], space)

    @classmethod
    def from_vectors(cls, vectors: Sequence[SparseVector]) -> "CSRMatrix":
        if not vectors:
            raise PreconditionError("no vectors")
        dims = vectors[0].dims
        space = vectors[0].space
        if any(v.dims != dims or v.space != space for v in vectors):
            raise PreconditionError("vectors come from different feature spaces")
        lengths = [len(v.indices) for v in vectors]
        indptr = np.concatenate(([0], np.cumsum(lengths))).astype(np.int64)
        indices = np.concatenate([np.asarray(v.indices, dtype=np.int64) for v in vectors])
        data = np.concatenate([np.asarray(v.weights, dtype=np.float64) for v in vectors])
        return cls(indptr, indices, data, dims, space)


@dataclass(frozen=True)
class DenseMatrix:
    values: np.ndarray
    space: str = ""

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def row(self, i: int) -> DenseVector:
        return DenseVector(self.values[i], self.space)


def _digest(*parts: bytes) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(len(p).to_bytes(8, "little"))
        h.update(p)
    return h.hexdigest()


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: Vocabulary
    idf: np.ndarray
    mode: TfidfMode
    descriptor: str = field(init=False, compare=False)

    def __post_init__(self):
        if self.idf.shape != (len(self.vocabulary),):
            raise PreconditionError("idf length must equal vocabulary size")
        lo, hi = self.vocabulary.ngram_range
        object.__setattr__(
            self,
            "descriptor",
            _digest(
                b"tfidf",
                self.mode.value.encode(),
                f"{lo}..{hi}".encode(),
                "\n".join(self.vocabulary.ngrams).encode("utf-8"),
                np.ascontiguousarray(self.idf, dtype="<f8").tobytes(),
            ),
        )

    @property
    def dims(self) -> int:
        return len(self.vocabulary)

    def transform(self, tokens: Sequence[str]) -> SparseVector:
        return self.transform_many([tokens]).row(0)

    def transform_many(self, docs: Iterable[Sequence[str]]) -> CSRMatrix:
        lo, hi = self.vocabulary.ngram_range
        index = self.vocabulary.index
        cols: list[int] = []
        tfs: list[int] = []
        lengths: list[int] = []
        for toks in docs:
            counts = kernels.doc_term_counts(toks, lo, hi, index)
            keys = sorted(counts)
            cols.extend(keys)
            tfs.extend(counts[k] for k in keys)
            lengths.append(len(keys))
        indices = np.asarray(cols, dtype=np.int64)
        data = np.asarray(tfs, dtype=np.float64) * self.idf[indices]
        rows = np.repeat(np.arange(len(lengths)), lengths)
        keep = data != 0.0
        if not keep.all():
            indices, data, rows = indices[keep], data[keep], rows[keep]
        row_nnz = np.bincount(rows, minlength=len(lengths))
        indptr = np.concatenate(([0], np.cumsum(row_nnz))).astype(np.int64)
        if self.mode is TfidfMode.SMOOTHED_L2 and data.size:
            norms = np.sqrt(np.bincount(rows, weights=data * data, minlength=len(lengths)))
            data = data / norms[rows]
        return CSRMatrix(indptr, indices, data, self.dims, self.descriptor)

    def to_dict(self) -> dict:
        v = self.vocabulary
        return {
            "kind": "tfidf",
            "descriptor": self.descriptor,
            "mode": self.mode.value,
            "ngram_range": list(v.ngram_range),
            "n_documents": v.n_documents,
            "min_count": v.min_count,
            "max_size": v.max_size,
            "ngrams": v.ngrams,
            "df": [e.df for e in v.entries],
            "tf_total": [e.tf_total for e in v.entries],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "TfidfModel":
        entries = tuple(
            VocabEntry(g, i, df, tf)
            for i, (g, df, tf) in enumerate(zip(payload["ngrams"], payload["df"], payload["tf_total"]))
        )
        vocab = Vocabulary(
            entries,
            payload["n_documents"],
            tuple(payload["ngram_range"]),
            payload["min_count"],
            payload["max_size"],
        )
        model = fit_tfidf(vocab, payload["mode"])
        if model.descriptor != payload["descriptor"]:
            raise ParseError("tf-idf feature space does not match its recorded descriptor")
        return model


def fit_tfidf(vocabulary: Vocabulary, mode: TfidfMode | str = TfidfMode.SMOOTHED_L2) -> TfidfModel:
    """Compute natural-log idf weights for every vocabulary entry."""
    mode = TfidfMode.parse(mode)
    n = vocabulary.n_documents
    if n < 1:
        raise PreconditionError("n_documents must be >= 1")
    df = np.array([e.df for e in vocabulary.entries], dtype=np.float64)
    if np.any(df < 1) or np.any(df > n):
        raise PreconditionError("document frequencies must lie in 1..n_documents")
    if mode is TfidfMode.RAW_EQ1:
        idf = np.log(n / df)
    else:
        idf = np.log((1.0 + n) / (1.0 + df)) + 1.0
    return TfidfModel(vocabulary, idf, mode)


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    words: dict
    vectors: np.ndarray
    source_name: str = ""
    fingerprint: str = field(init=False, compare=False)

    def __post_init__(self):
        if self.vectors.shape != (len(self.words), self.dim):
            raise PreconditionError("vector matrix shape does not match words and dim")
        ordered = sorted(self.words.items(), key=lambda kv: kv[1])
        object.__setattr__(
            self,
            "fingerprint",
            _digest(
                b"embeddings",
                str(self.dim).encode(),
                "\n".join(w for w, _ in ordered).encode("utf-8"),
                np.ascontiguousarray(self.vectors, dtype="<f8").tobytes(),
            ),
        )

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.words

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.words[word]]


def load_embeddings(
    path: str | os.PathLike,
    expected_dim: Optional[int] = None,
    source_name: Optional[str] = None,
) -> EmbeddingTable:
    """Read a word2vec-style text file (``count dim`` header, then ``word v1 .. vdim``).

    Words are normalized on load; when two raw words normalize to the same key
    the first one in the file wins.
    """
    path = os.fspath(path)
    words: dict[str, int] = {}
    rows: list[np.ndarray] = []
    with open(path, encoding="utf-8", errors="strict") as fh:
        header = fh.readline().split()
        try:
            declared_count, dim = int(header[0]), int(header[1])
        except (IndexError, ValueError):
            raise ParseError(f"{path}: line 1: expected header 'vocab_count dim'") from None
        if expected_dim is not None and dim != expected_dim:
            raise ParseError(f"{path}: header dim {dim} != expected {expected_dim}")
        seen_lines = 0
        for line_no, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").rstrip(" ").split(" ")
            if len(parts) == 1 and not parts[0]:
                continue
            seen_lines += 1
            if len(parts) - 1 != dim:
                raise ParseError(f"{path}: line {line_no}: {len(parts) - 1} values, expected {dim}")
            try:
                vec = np.array(parts[1:], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"{path}: line {line_no}: non-numeric value ({exc})") from None
            if not np.all(np.isfinite(vec)):
                raise ParseError(f"{path}: line {line_no}: non-finite value")
            key = normalize_text(parts[0])
            if key in words:
                continue
            words[key] = len(rows)
            rows.append(vec)
    if seen_lines != declared_count:
        logger.warning("%s: header declares %d vectors, file has %d", path, declared_count, seen_lines)
    vectors = np.vstack(rows) if rows else np.zeros((0, dim))
    return EmbeddingTable(dim, words, vectors, source_name or os.path.basename(path))


def eligible_words(docs: Iterable[Sequence[str]], min_count: int = DEFAULT_MIN_COUNT) -> frozenset:
    """Words occurring more than ``min_count`` times across ``docs``."""
    counts = count_ngrams(docs, (1, 1))
    return frozenset(w for w, (tf, _) in counts.items() if tf > min_count)


def embed_document(table: EmbeddingTable, tokens: Sequence[str], eligible: Optional[frozenset] = None) -> DenseVector:
    """Mean of the table vectors of eligible, in-table tokens (zero vector if none)."""
    rows = [table.words[t] for t in tokens if (eligible is None or t in eligible) and t in table.words]
    if not rows:
        return DenseVector(np.zeros(table.dim))
    acc = np.zeros(table.dim)
    for r in rows:
        acc += table.vectors[r]
    return DenseVector(acc / len(rows))


@dataclass(frozen=True)
class EmbeddingFeaturizer:
    """Averaged-embedding features bound to one table and a frozen eligible-word set."""

    table: EmbeddingTable
    eligible: frozenset
    descriptor: str = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "descriptor",
            _digest(b"embedding", self.table.fingerprint.encode(), "\n".join(sorted(self.eligible)).encode("utf-8")),
        )

    @property
    def dims(self) -> int:
        return self.table.dim

    def transform(self, tokens: Sequence[str]) -> DenseVector:
        v = embed_document(self.table, tokens, self.eligible)
        return DenseVector(v.values, self.descriptor)

    def transform_many(self, docs: Iterable[Sequence[str]]) -> DenseMatrix:
        rows = [embed_document(self.table, toks, self.eligible).values for toks in docs]
        values = np.vstack(rows) if rows else np.zeros((0, self.table.dim))
        return DenseMatrix(values, self.descriptor)

    def to_dict(self) -> dict:
        return {
            "kind": "embedding",
            "descriptor": self.descriptor,
            "source_name": self.table.source_name,
            "table_fingerprint": self.table.fingerprint,
            "dim": self.table.dim,
            "eligible": sorted(self.eligible),
        }

    @classmethod
    def from_dict(cls, payload: dict, table: EmbeddingTable) -> "EmbeddingFeaturizer":
        if table.fingerprint != payload["table_fingerprint"]:
            raise FeatureSpaceMismatch(
                f"embedding table {table.source_name!r} differs from the one the model was trained on "
                f"({payload['source_name']!r})"
            )
        return cls(table, frozenset(payload["eligible"]))
