"""Rank reviews against a policy query and score rankings against judgments."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .embedding import EmbeddingSet, cosine_similarity
from .errors import RetrievalError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RankedList:
    """Reviews ordered by relevance score, descending; ties by ascending doc_id."""

    query_id: str
    entries: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        # The tie rule (equal scores sorted by ascending doc_id) is enforced by
        # rank_reviews; re-checking here would reject CSVs whose printed scores
        # rounded into new ties.
        seen: set[str] = set()
        prev: float | None = None
        for doc_id, score in self.entries:
            if doc_id in seen:
                raise RetrievalError(f"ranked list repeats doc_id {doc_id!r}")
            seen.add(doc_id)
            if prev is not None and score > prev:
                raise RetrievalError("ranked list scores must be non-increasing")
            prev = score

    def ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


class RelevanceJudgments:
    """Binary relevance labels; querying an unjudged doc_id is an error."""

    def __init__(self, labels: Mapping[str, int]) -> None:
        for doc_id, label in labels.items():
            if label not in (0, 1):
                raise RetrievalError(f"judgment for {doc_id!r} must be 0 or 1, got {label!r}")
        self._labels = dict(labels)

    def is_relevant(self, doc_id: str) -> bool:
        try:
            return self._labels[doc_id] == 1
        except KeyError:
            raise RetrievalError(f"no relevance judgment for doc_id {doc_id!r}") from None

    @property
    def total_relevant(self) -> int:
        return sum(self._labels.values())

    def __len__(self) -> int:
        return len(self._labels)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._labels


def load_judgments(path: str | Path) -> RelevanceJudgments:
    """Read JSONL judgments: one ``{"id": ..., "label": 0|1}`` per line."""
    labels: dict[str, int] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RetrievalError(f"{path}: line {lineno}: malformed JSON: {exc.msg}") from None
            if "id" not in record or "label" not in record:
                raise RetrievalError(f"{path}: line {lineno}: need both 'id' and 'label'")
            labels[str(record["id"])] = record["label"]
    return RelevanceJudgments(labels)


def rank_reviews(
    query_vec: np.ndarray,
    review_vecs: EmbeddingSet,
    query_id: str = "query",
) -> RankedList:
    """Order every non-degenerate review by cosine similarity to the query.

    Zero-vector reviews cannot be scored; they are skipped with a warning
    rather than failing the whole ranking.
    """
    query = np.asarray(query_vec, dtype=np.float64)
    if query.shape != (review_vecs.dim,):
        raise RetrievalError(
            f"query dimension {query.shape} does not match embedding dim {review_vecs.dim}"
        )
    if not np.any(query):
        raise RetrievalError("query vector is zero; ranking undefined")
    degenerate = set(review_vecs.degenerate_ids())
    if degenerate:
        logger.warning(
            "excluding %d degenerate (zero-vector) reviews from ranking: %s",
            len(degenerate),
            sorted(degenerate)[:10],
        )
    scored = [
        (doc_id, cosine_similarity(query, vec))
        for doc_id, vec in review_vecs.items()
        if doc_id not in degenerate
    ]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return RankedList(query_id=query_id, entries=tuple(scored))


def top_m(ranked: RankedList, m: int) -> RankedList:
    """First ``min(m, len)`` entries, order preserved."""
    if m < 1:
        raise RetrievalError(f"m must be >= 1, got {m}")
    return RankedList(query_id=ranked.query_id, entries=ranked.entries[:m])


def _relevance_prefix(ranked: RankedList, judgments: RelevanceJudgments, k: int) -> list[bool]:
    return [judgments.is_relevant(doc_id) for doc_id, _ in ranked.entries[:k]]


def precision_at_k(ranked: RankedList, judgments: RelevanceJudgments, k: int) -> float:
    if not 1 <= k <= len(ranked):
        raise RetrievalError(f"k={k} outside 1..{len(ranked)}")
    return sum(_relevance_prefix(ranked, judgments, k)) / k


def recall_at_k(ranked: RankedList, judgments: RelevanceJudgments, k: int) -> float:
    if not 1 <= k <= len(ranked):
        raise RetrievalError(f"k={k} outside 1..{len(ranked)}")
    total = judgments.total_relevant
    if total == 0:
        raise RetrievalError("recall undefined: no relevant items in judgments")
    return sum(_relevance_prefix(ranked, judgments, k)) / total


def f1_at_k(ranked: RankedList, judgments: RelevanceJudgments, k: int) -> float:
    """Harmonic mean of precision@k and recall@k; 0.0 when both are 0."""
    p = precision_at_k(ranked, judgments, k)
    r = recall_at_k(ranked, judgments, k)
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def average_precision(ranked: RankedList, judgments: RelevanceJudgments) -> float:
    """Mean of precision values at the ranks of relevant items.

    The denominator is the total number of relevant items in the judgments,
    so relevant items missing from the list count against the score.
    """
    total = judgments.total_relevant
    if total == 0:
        raise RetrievalError("average precision undefined: no relevant items")
    hits = 0
    acc = 0.0
    for rank, (doc_id, _) in enumerate(ranked.entries, start=1):
        if judgments.is_relevant(doc_id):
            hits += 1
            acc += hits / rank
    return acc / total


@dataclass(frozen=True)
class F1Curve:
    points: tuple[tuple[int, float], ...]
    best_k: int
    best_f1: float


def f1_curve(ranked: RankedList, judgments: RelevanceJudgments, k_max: int) -> F1Curve:
    """F1 at every cutoff in 1..k_max, plus the argmax cutoff (smallest k on ties)."""
    if not 1 <= k_max <= len(ranked):
        raise RetrievalError(f"k_max={k_max} outside 1..{len(ranked)}")
    total = judgments.total_relevant
    if total == 0:
        raise RetrievalError("F1 curve undefined: no relevant items")
    points: list[tuple[int, float]] = []
    hits = 0
    best_k, best_f1 = 1, -1.0
    for k, (doc_id, _) in enumerate(ranked.entries[:k_max], start=1):
        if judgments.is_relevant(doc_id):
            hits += 1
        p = hits / k
        r = hits / total
        f1 = 0.0 if p + r == 0.0 else 2.0 * p * r / (p + r)
        points.append((k, f1))
        if f1 > best_f1:
            best_k, best_f1 = k, f1
    return F1Curve(points=tuple(points), best_k=best_k, best_f1=best_f1)


def export_ranked_csv(ranked: RankedList, path: str | Path) -> None:
    """Write ``rank,doc_id,score`` rows; scores printed with 6 decimals."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["rank", "doc_id", "score"])
        for rank, (doc_id, score) in enumerate(ranked.entries, start=1):
            writer.writerow([rank, doc_id, f"{score:.6f}"])


def load_ranked_csv(path: str | Path) -> RankedList:
    entries: list[tuple[str, float]] = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            entries.append((row["doc_id"], float(row["score"])))
    return RankedList(query_id=str(path), entries=tuple(entries))
