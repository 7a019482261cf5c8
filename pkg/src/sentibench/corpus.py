"""Review data model, raw CSV ingestion and the consolidated dataset file."""

from __future__ import annotations

import csv
import enum
import io
import logging
import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from .errors import DomainError, PreconditionError, SchemaError

logger = logging.getLogger(__name__)

CONSOLIDATED_HEADER = ("id", "dataset", "review_text", "rating", "polarity", "kfold", "tokens")


class Dataset(enum.Enum):
    OLIST = "olist"
    BUSCAPE = "buscape"
    B2W = "b2w"
    UTLC_APPS = "utlc_apps"
    UTLC_MOVIES = "utlc_movies"

    @property
    def display(self) -> str:
        return _DISPLAY[self]

    @classmethod
    def parse(cls, name: str) -> "Dataset":
        key = name.strip().lower().replace("-", "_")
        for member in cls:
            if key in (member.value, member.display.lower(), member.value.replace("_", "")):
                return member
        raise SchemaError(f"unknown dataset {name!r}; expected one of {[m.value for m in cls]}")


_DISPLAY = {
    Dataset.OLIST: "Olist",
    Dataset.BUSCAPE: "Buscape",
    Dataset.B2W: "B2W",
    Dataset.UTLC_APPS: "UTLCApps",
    Dataset.UTLC_MOVIES: "UTLCMovies",
}


def assign_polarity(rating: int) -> Optional[int]:
    """Map a 1..5 star rating to polarity: 1-2 negative, 4-5 positive, 3 none."""
    if isinstance(rating, bool) or not isinstance(rating, int) or not 1 <= rating <= 5:
        raise DomainError(f"rating must be an integer in 1..5, got {rating!r}")
    if rating <= 2:
        return 0
    if rating >= 4:
        return 1
    return None


@dataclass(frozen=True)
class Review:
    id: str
    dataset: Dataset
    text: str
    rating: int
    polarity: Optional[int] = None
    fold: Optional[int] = None
    tokens: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        expected = assign_polarity(self.rating)
        if self.polarity != expected:
            raise PreconditionError(
                f"review {self.id}: polarity {self.polarity!r} inconsistent with rating {self.rating}"
            )
        if not self.text.strip():
            raise PreconditionError(f"review {self.id}: empty text")
        if self.fold is not None and not 1 <= self.fold <= 10:
            raise PreconditionError(f"review {self.id}: fold {self.fold} outside 1..10")
        if self.tokens is not None and not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))


@dataclass(frozen=True)
class Corpus:
    reviews: tuple[Review, ...]
    name: str = "corpus"

    def __post_init__(self):
        if not isinstance(self.reviews, tuple):
            object.__setattr__(self, "reviews", tuple(self.reviews))
        dupes = [k for k, v in Counter(r.id for r in self.reviews).items() if v > 1]
        if dupes:
            raise PreconditionError(f"duplicate review ids in corpus {self.name!r}: {dupes[:5]}")

    def __len__(self):
        return len(self.reviews)

    def __iter__(self):
        return iter(self.reviews)

    def with_reviews(self, reviews: Iterable[Review], name: Optional[str] = None) -> "Corpus":
        return Corpus(tuple(reviews), name or self.name)

    def by_dataset(self, dataset: Dataset) -> "Corpus":
        return self.with_reviews((r for r in self.reviews if r.dataset is dataset), dataset.display)

    def datasets(self) -> list[Dataset]:
        present = {r.dataset for r in self.reviews}
        return [d for d in Dataset if d in present]

    @property
    def labels(self) -> list[int]:
        return [r.polarity for r in self.reviews]

    @property
    def token_lists(self) -> list[tuple[str, ...]]:
        missing = [r.id for r in self.reviews if r.tokens is None]
        if missing:
            raise PreconditionError(f"reviews without tokens: {missing[:5]}")
        return [r.tokens for r in self.reviews]


@dataclass
class DropCounts:
    """Row accounting for one raw file. ``rows == kept + dropped``."""

    rows: int = 0
    kept: int = 0
    malformed: int = 0
    empty_text: int = 0
    null_rating: int = 0
    zero_rating: int = 0
    out_of_range: int = 0
    malformed_rows: list[int] = field(default_factory=list)

    @property
    def dropped(self) -> int:
        return self.malformed + self.empty_text + self.null_rating + self.zero_rating + self.out_of_range

    def as_dict(self) -> dict:
        return {
            "rows": self.rows,
            "kept": self.kept,
            "malformed": self.malformed,
            "empty_text": self.empty_text,
            "null_rating": self.null_rating,
            "zero_rating": self.zero_rating,
            "out_of_range": self.out_of_range,
        }


DEFAULT_COLUMNS = {"text": "review_text", "rating": "rating", "id": None, "fold": None}


def _parse_int(value: str) -> int:
    # int() accepts "5" and " 5 " but rejects "4.5"; fractional ratings are malformed.
    return int(value.strip())


def ingest_raw(
    path: str | os.PathLike,
    dataset: Dataset,
    column_map: Optional[Mapping[str, Optional[str]]] = None,
) -> tuple[Corpus, DropCounts]:
    """Read one raw per-dataset CSV export.

    ``column_map`` maps the logical fields ``text``, ``rating`` and optionally
    ``id`` and ``fold`` to header names. Rows are dropped by the first matching
    rule in the order malformed > empty text > null/zero/out-of-range rating.
    """
    cols = dict(DEFAULT_COLUMNS)
    if column_map:
        cols.update({k: v for k, v in column_map.items() if v is not None or k in ("id", "fold")})
    counts = DropCounts()
    reviews = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, strict=True)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, no header row") from None
        positions = {}
        for key in ("text", "rating", "id", "fold"):
            name = cols.get(key)
            if name is None:
                continue
            if name not in header:
                raise SchemaError(f"{path}: mapped column {name!r} for {key!r} not in header {header}")
            positions[key] = header.index(name)
        width = len(header)
        row_no = 1
        while True:
            row_no += 1
            try:
                row = next(reader)
            except StopIteration:
                break
            except csv.Error as exc:
                counts.rows += 1
                counts.malformed += 1
                counts.malformed_rows.append(row_no)
                logger.warning("%s: row %d malformed (%s); skipped", path, row_no, exc)
                continue
            if not row:
                continue
            counts.rows += 1
            if len(row) != width:
                counts.malformed += 1
                counts.malformed_rows.append(row_no)
                logger.warning("%s: row %d has %d fields, expected %d; skipped", path, row_no, len(row), width)
                continue
            text = row[positions["text"]]
            raw_rating = row[positions["rating"]].strip()
            rating = None
            if raw_rating:
                try:
                    rating = _parse_int(raw_rating)
                except ValueError:
                    counts.malformed += 1
                    counts.malformed_rows.append(row_no)
                    logger.warning("%s: row %d rating %r is not an integer; skipped", path, row_no, raw_rating)
                    continue
            fold = None
            if "fold" in positions:
                raw_fold = row[positions["fold"]].strip()
                try:
                    fold = _parse_int(raw_fold) if raw_fold else None
                except ValueError:
                    fold = -1
                if fold is not None and not 1 <= fold <= 10:
                    counts.malformed += 1
                    counts.malformed_rows.append(row_no)
                    logger.warning("%s: row %d fold %r outside 1..10; skipped", path, row_no, raw_fold)
                    continue
            if not text.strip():
                counts.empty_text += 1
                continue
            if rating is None:
                counts.null_rating += 1
                continue
            if rating == 0:
                counts.zero_rating += 1
                continue
            if not 1 <= rating <= 5:
                counts.out_of_range += 1
                continue
            rid = row[positions["id"]].strip() if "id" in positions else ""
            if not rid:
                rid = f"{dataset.value}_{row_no}"
            reviews.append(
                Review(
                    id=rid,
                    dataset=dataset,
                    text=text,
                    rating=rating,
                    polarity=assign_polarity(rating),
                    fold=fold,
                )
            )
    seen = Counter(r.id for r in reviews)
    if any(v > 1 for v in seen.values()):
        # Same id twice inside one file: keep the first, count the rest as malformed.
        kept_ids = set()
        unique = []
        for r in reviews:
            if r.id in kept_ids:
                counts.malformed += 1
                continue
            kept_ids.add(r.id)
            unique.append(r)
        reviews = unique
    counts.kept = len(reviews)
    return Corpus(tuple(reviews), dataset.display), counts


def merge_corpora(corpora: Sequence[Corpus], name: str = "all") -> Corpus:
    """Concatenate corpora; ids shared by several datasets get a ``dataset:`` prefix."""
    owners: dict[str, set] = {}
    for c in corpora:
        for r in c.reviews:
            owners.setdefault(r.id, set()).add(r.dataset)
    merged = []
    for c in corpora:
        for r in c.reviews:
            if len(owners[r.id]) > 1:
                r = replace(r, id=f"{r.dataset.value}:{r.id}")
            merged.append(r)
    return Corpus(tuple(merged), name)


def filter_polarity_task(corpus: Corpus) -> Corpus:
    """Keep only reviews that carry a polarity label (drops 3-star reviews)."""
    return corpus.with_reviews(r for r in corpus.reviews if r.polarity is not None)


def _render_consolidated(corpus: Corpus, require_folds: bool) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(CONSOLIDATED_HEADER)
    for r in corpus.reviews:
        if r.tokens is None:
            raise PreconditionError(f"review {r.id}: tokens not computed")
        if require_folds and r.fold is None:
            raise PreconditionError(f"review {r.id}: fold not assigned")
        writer.writerow(
            (
                r.id,
                r.dataset.value,
                r.text,
                r.rating,
                "" if r.polarity is None else r.polarity,
                "" if r.fold is None else r.fold,
                " ".join(r.tokens),
            )
        )
    return buf.getvalue()


def atomic_write_text(path: str | os.PathLike, content: str) -> None:
    """Write ``content`` to ``path`` via a temp file in the same directory and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_consolidated(corpus: Corpus, path: str | os.PathLike, require_folds: bool = True) -> None:
    """Write the consolidated CSV (LF newlines, RFC 4180 quoting).

    ``require_folds=False`` allows an empty ``kfold`` column, which is what
    ``prepare`` emits before partitioning.
    """
    atomic_write_text(path, _render_consolidated(corpus, require_folds))


def read_consolidated(path: str | os.PathLike, name: Optional[str] = None) -> Corpus:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, strict=True)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if header != CONSOLIDATED_HEADER:
            missing = [c for c in CONSOLIDATED_HEADER if c not in header]
            extra = [c for c in header if c not in CONSOLIDATED_HEADER]
            raise SchemaError(
                f"{path}: header mismatch; missing={missing} unexpected={extra} "
                f"expected order={list(CONSOLIDATED_HEADER)}"
            )
        reviews = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(CONSOLIDATED_HEADER):
                raise SchemaError(f"{path}: row {line_no} has {len(row)} fields, expected {len(CONSOLIDATED_HEADER)}")
            rid, ds, text, rating, polarity, fold, tokens = row
            try:
                reviews.append(
                    Review(
                        id=rid,
                        dataset=Dataset.parse(ds),
                        text=text,
                        rating=int(rating),
                        polarity=int(polarity) if polarity != "" else None,
                        fold=int(fold) if fold != "" else None,
                        tokens=tuple(tokens.split(" ")) if tokens else (),
                    )
                )
            except (ValueError, PreconditionError) as exc:
                raise SchemaError(f"{path}: row {line_no}: {exc}") from exc
    return Corpus(tuple(reviews), name or os.path.basename(os.fspath(path)))
