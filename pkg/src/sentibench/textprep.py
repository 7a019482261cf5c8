"""Text normalization and tokenization for Portuguese reviews."""

from __future__ import annotations

import os
import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional

from .errors import ParseError, PreconditionError

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_CEDILLA = str.maketrans({"ç": "c", "Ç": "c"})

DEFAULT_STOPWORDS = "stopwords_pt.txt"


def normalize_text(text: str, fold_c_cedilla: bool = True) -> str:
    """Lowercase, map ç to c, and strip diacritics via canonical decomposition.

    Characters other than letters and digits are left in place.

    >>> normalize_text("Ótimo, NÃO gostei")
    'otimo, nao gostei'
    """
    if fold_c_cedilla:
        # Explicit pass so the rule holds regardless of the platform's decomposition tables.
        text = text.translate(_CEDILLA)
    text = text.lower()
    decomposed = unicodedata.normalize("NFD", text)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


@dataclass(frozen=True)
class NormalizationConfig:
    min_token_len: int = 2
    max_token_len: int = 30
    stopword_set: frozenset = field(default_factory=frozenset)
    fold_c_cedilla: bool = True

    def __post_init__(self):
        if not 1 <= self.min_token_len <= self.max_token_len:
            raise PreconditionError(
                f"need 1 <= min_token_len <= max_token_len, got {self.min_token_len}, {self.max_token_len}"
            )
        if not isinstance(self.stopword_set, frozenset):
            object.__setattr__(self, "stopword_set", frozenset(self.stopword_set))
        bad = sorted(w for w in self.stopword_set if normalize_text(w) != w)
        if bad:
            raise PreconditionError(f"stopwords not in normalized form: {bad[:5]}")


def tokenize(text: str, config: Optional[NormalizationConfig] = None) -> list[str]:
    """Split normalized text into ``[a-z0-9]+`` runs, filtering by length then stopwords."""
    config = config or NormalizationConfig()
    lo, hi, stop = config.min_token_len, config.max_token_len, config.stopword_set
    return [t for t in _TOKEN_RE.findall(text) if lo <= len(t) <= hi and t not in stop]


def preprocess(text: str, config: Optional[NormalizationConfig] = None) -> list[str]:
    """Raw text to tokens: ``tokenize(normalize_text(text))``."""
    config = config or NormalizationConfig()
    return tokenize(normalize_text(text, config.fold_c_cedilla), config)


def _parse_stopword_lines(lines: Iterable[str], source: str) -> set[str]:
    words = set()
    for line_no, line in enumerate(lines, start=1):
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        norm = normalize_text(entry)
        if _TOKEN_RE.fullmatch(norm) is None:
            raise ParseError(f"{source}: line {line_no}: stopword {entry!r} does not normalize to a single token")
        words.add(norm)
    return words


def load_stopwords(path: Optional[str | os.PathLike] = None) -> set[str]:
    """Load a one-word-per-line stopword file; ``None`` loads the bundled Portuguese list."""
    if path is None:
        text = resources.files("sentibench").joinpath("data", DEFAULT_STOPWORDS).read_text(encoding="utf-8")
        return _parse_stopword_lines(text.splitlines(), DEFAULT_STOPWORDS)
    with open(path, encoding="utf-8") as fh:
        return _parse_stopword_lines(fh, os.fspath(path))
