"""Ingestion, normalization, and tokenization of reviews and privacy policies.

The corpus layer owns the raw text units everything else consumes: app-store
reviews (JSONL, one object per line), privacy-policy documents (plain text
with optional markdown-style section headings), token streams, and the
vocabulary derived from them.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import date as _date
from fnmatch import fnmatchcase
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import CorpusError

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_HEADING_RE = re.compile(r"^(#{1,6})\s+(.*\S)\s*$")

REVIEW_FIELDS = ("id", "app", "category", "text", "rating", "date", "region")


@dataclass(frozen=True)
class Review:
    """One app-store review. ``rating``, ``date``, and ``region`` are optional."""

    id: str
    app: str
    text: str
    category: str = ""
    rating: int | None = None
    date: str | None = None
    region: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("review id must be nonempty")
        if not self.text or not self.text.strip():
            raise CorpusError(f"review {self.id!r}: text is empty after trim")
        if self.rating is not None:
            if isinstance(self.rating, bool) or not isinstance(self.rating, int):
                raise CorpusError(f"review {self.id!r}: rating must be an integer")
            if not 1 <= self.rating <= 5:
                raise CorpusError(f"review {self.id!r}: rating {self.rating} outside 1..5")
        if self.date is not None:
            try:
                _date.fromisoformat(self.date)
            except ValueError:
                raise CorpusError(
                    f"review {self.id!r}: date {self.date!r} is not an ISO-8601 date"
                ) from None


class Corpus:
    """Ordered collection of reviews with unique ids."""

    def __init__(self, reviews: Iterable[Review] = ()) -> None:
        self._reviews: list[Review] = []
        self._by_id: dict[str, Review] = {}
        for review in reviews:
            self.add(review)

    def add(self, review: Review) -> None:
        if review.id in self._by_id:
            raise CorpusError(f"duplicate review id {review.id!r}")
        self._reviews.append(review)
        self._by_id[review.id] = review

    def ids(self) -> list[str]:
        return [r.id for r in self._reviews]

    def get(self, doc_id: str) -> Review:
        try:
            return self._by_id[doc_id]
        except KeyError:
            raise CorpusError(f"unknown review id {doc_id!r}") from None

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    def __len__(self) -> int:
        return len(self._reviews)

    def __iter__(self) -> Iterator[Review]:
        return iter(self._reviews)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return self._reviews == other._reviews


@dataclass(frozen=True)
class PolicyDocument:
    """Privacy-policy text with generic sections already removed."""

    app: str
    text: str
    excluded_sections: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.text or not self.text.strip():
            raise CorpusError(f"policy for {self.app!r}: text is empty")


@dataclass(frozen=True)
class TokenStream:
    """Ordered lowercase tokens of one document."""

    doc_id: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class Vocabulary:
    """Lexicographically ordered unique terms with a term -> index bijection."""

    terms: tuple[str, ...]
    term_to_index: Mapping[str, int] = field(compare=False)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.term_to_index

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> "Vocabulary":
        ordered = tuple(sorted(set(terms)))
        return cls(terms=ordered, term_to_index={t: i for i, t in enumerate(ordered)})


@dataclass(frozen=True)
class TokenizeConfig:
    """Tokenizer knobs: minimum token length and optional stopword removal."""

    min_len: int = 2
    remove_stopwords: bool = False
    stopwords: frozenset[str] = frozenset()

    def with_default_stopwords(self) -> "TokenizeConfig":
        return replace(self, remove_stopwords=True, stopwords=load_stopwords())


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load a stopword list, one lowercase term per line. Default: bundled English list."""
    if path is None:
        text = resources.files("privmine.data").joinpath("stopwords_en.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def tokenize(text: str, config: TokenizeConfig = TokenizeConfig(), doc_id: str = "") -> TokenStream:
    """Lowercase and split on non-alphanumeric boundaries, then filter.

    Tokens shorter than ``config.min_len`` are dropped; stopwords are dropped
    iff ``config.remove_stopwords``. Empty text yields an empty stream.
    """
    tokens = [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= config.min_len]
    if config.remove_stopwords:
        tokens = [t for t in tokens if t not in config.stopwords]
    return TokenStream(doc_id=doc_id, tokens=tuple(tokens))


def tokenize_corpus(corpus: Corpus, config: TokenizeConfig = TokenizeConfig()) -> list[TokenStream]:
    return [tokenize(r.text, config, doc_id=r.id) for r in corpus]


def load_reviews(path: str | Path) -> Corpus:
    """Read a JSONL review file, one object per line.

    Each line needs at least ``id``, ``app``, and ``text``. Input order is
    preserved; a malformed line or duplicate id aborts with the line number.
    """
    corpus = Corpus()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: malformed JSON: {exc.msg}") from None
            if not isinstance(raw, dict):
                raise CorpusError(f"{path}: line {lineno}: expected a JSON object")
            unknown = set(raw) - set(REVIEW_FIELDS)
            if unknown:
                raise CorpusError(
                    f"{path}: line {lineno}: unknown fields {sorted(unknown)}"
                )
            missing = {"id", "app", "text"} - set(raw)
            if missing:
                raise CorpusError(
                    f"{path}: line {lineno}: missing required fields {sorted(missing)}"
                )
            try:
                review = Review(
                    id=str(raw["id"]),
                    app=str(raw["app"]),
                    text=str(raw["text"]),
                    category=str(raw.get("category", "")),
                    rating=raw.get("rating"),
                    date=raw.get("date"),
                    region=raw.get("region"),
                )
            except CorpusError as exc:
                raise CorpusError(f"{path}: line {lineno}: {exc}") from None
            if review.id in corpus:
                raise CorpusError(
                    f"{path}: line {lineno}: duplicate review id {review.id!r}"
                )
            corpus.add(review)
    return corpus


def save_reviews(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back to JSONL; optional fields are omitted when unset."""
    with open(path, "w", encoding="utf-8") as handle:
        for r in corpus:
            record: dict[str, object] = {"id": r.id, "app": r.app, "category": r.category, "text": r.text}
            if r.rating is not None:
                record["rating"] = r.rating
            if r.date is not None:
                record["date"] = r.date
            if r.region is not None:
                record["region"] = r.region
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def _split_sections(text: str) -> list[tuple[str | None, str]]:
    """Split policy text into (heading, chunk) pairs; preamble has heading None."""
    sections: list[tuple[str | None, str]] = []
    heading: str | None = None
    buf: list[str] = []
    for line in text.splitlines(keepends=True):
        match = _HEADING_RE.match(line)
        if match:
            if buf or heading is not None:
                sections.append((heading, "".join(buf)))
            heading = match.group(2)
            buf = [line]
        else:
            buf.append(line)
    if buf or heading is not None:
        sections.append((heading, "".join(buf)))
    return sections


def load_policy(
    path: str | Path,
    exclusions: Sequence[str] = (),
    app: str | None = None,
) -> PolicyDocument:
    """Load a policy text file, dropping sections whose heading matches a pattern.

    Patterns are shell-style (``Contact*``) and matched case-insensitively
    against markdown headings. Text before the first heading is always kept.
    """
    path = Path(path)
    text = path.read_text("utf-8")
    app_name = app if app is not None else path.stem
    kept: list[str] = []
    dropped: list[str] = []
    for heading, chunk in _split_sections(text):
        if heading is not None and any(
            fnmatchcase(heading.lower(), pat.lower()) for pat in exclusions
        ):
            dropped.append(heading)
        else:
            kept.append(chunk)
    remainder = "".join(kept)
    if not remainder.strip():
        raise CorpusError(f"{path}: policy fully excluded by patterns {list(exclusions)}")
    return PolicyDocument(app=app_name, text=remainder, excluded_sections=tuple(dropped))


def build_vocabulary(streams: Iterable[TokenStream], min_df: int = 1) -> Vocabulary:
    """Terms whose document frequency is at least ``min_df``, sorted lexicographically."""
    if min_df < 1:
        raise CorpusError(f"min_df must be >= 1, got {min_df}")
    df: Counter[str] = Counter()
    for stream in streams:
        df.update(set(stream.tokens))
    return Vocabulary.from_terms(t for t, c in df.items() if c >= min_df)


@dataclass(frozen=True)
class DocumentFrequencies:
    """Per-term document frequency over a fixed set of documents."""

    n_docs: int
    df: Mapping[str, int]

    @classmethod
    def from_streams(cls, streams: Sequence[TokenStream]) -> "DocumentFrequencies":
        counts: Counter[str] = Counter()
        for stream in streams:
            counts.update(set(stream.tokens))
        return cls(n_docs=len(streams), df=dict(counts))
