"""Topic quality scores: sliding-window coherence and topic diversity.

Coherence follows the indirect-cosine construction: boolean sliding-window
probabilities feed NPMI context vectors over a topic's words, each word's
vector is compared against the summed vector of the whole topic, and the
topic score is the mean cosine. Diversity is the fraction of unique words
across all topic lists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import TokenStream
from .errors import CoherenceError

DEFAULT_WINDOW_SIZE = 110
DEFAULT_EPS = 1e-12


def sliding_windows(stream: TokenStream, size: int = DEFAULT_WINDOW_SIZE) -> list[tuple[str, ...]]:
    """Contiguous token spans stepping by one; short documents give one window."""
    if size < 1:
        raise CoherenceError(f"window size must be >= 1, got {size}")
    tokens = stream.tokens
    if not tokens:
        return []
    if len(tokens) <= size:
        return [tokens]
    return [tokens[i : i + size] for i in range(len(tokens) - size + 1)]


@dataclass(frozen=True)
class WindowStats:
    """Boolean occurrence counts of terms and term pairs over all windows."""

    window_size: int
    total_windows: int
    term_counts: Mapping[str, int]
    pair_counts: Mapping[tuple[str, str], int]

    @classmethod
    def from_streams(
        cls,
        streams: Iterable[TokenStream],
        size: int = DEFAULT_WINDOW_SIZE,
        terms: Iterable[str] | None = None,
    ) -> "WindowStats":
        """Count windows; restrict to ``terms`` to keep pair counts tractable."""
        tracked = None if terms is None else set(terms)
        term_counts: dict[str, int] = {}
        pair_counts: dict[tuple[str, str], int] = {}
        total = 0
        for stream in streams:
            for window in sliding_windows(stream, size):
                total += 1
                present = sorted(
                    {t for t in window if tracked is None or t in tracked}
                )
                for i, a in enumerate(present):
                    term_counts[a] = term_counts.get(a, 0) + 1
                    for b in present[i + 1 :]:
                        pair_counts[(a, b)] = pair_counts.get((a, b), 0) + 1
        return cls(
            window_size=size,
            total_windows=total,
            term_counts=term_counts,
            pair_counts=pair_counts,
        )

    def probability(self, term: str) -> float:
        count = self.term_counts.get(term, 0)
        if count == 0:
            raise CoherenceError(f"term {term!r} never occurs in the reference corpus")
        return count / self.total_windows

    def pair_probability(self, wi: str, wj: str) -> float:
        # A word co-occurs with itself wherever it occurs.
        if wi == wj:
            return self.probability(wi)
        self.probability(wi)
        self.probability(wj)
        key = (wi, wj) if wi <= wj else (wj, wi)
        return self.pair_counts.get(key, 0) / self.total_windows


def npmi(stats: WindowStats, wi: str, wj: str, eps: float = DEFAULT_EPS) -> float:
    """Normalized pointwise mutual information over window probabilities.

    NPMI = ln((P(wi,wj) + eps) / (P(wi) P(wj))) / (-ln(P(wi,wj) + eps)),
    symmetric and inside (-1, 1]. When both words fill every window the
    normalizer vanishes; the limit value 1.0 is returned. The eps that guards
    log(0) can push an always-co-occurring pair epsilon above 1, so the value
    is capped there.
    """
    p_i = stats.probability(wi)
    p_j = stats.probability(wj)
    p_ij = stats.pair_probability(wi, wj)
    if p_ij >= 1.0:
        return 1.0
    return min(1.0, math.log((p_ij + eps) / (p_i * p_j)) / (-math.log(p_ij + eps)))


@dataclass(frozen=True)
class CoherenceReport:
    per_topic: tuple[float, ...]
    mean: float
    window_size: int
    eps: float

    def as_dict(self) -> dict:
        return {
            "per_topic": list(self.per_topic),
            "mean": self.mean,
            "config": {"window_size": self.window_size, "eps": self.eps},
        }


def cv_coherence(
    topics: Sequence[Sequence[str]],
    streams: Sequence[TokenStream],
    window_size: int = DEFAULT_WINDOW_SIZE,
    eps: float = DEFAULT_EPS,
) -> CoherenceReport:
    """Score each topic word list against the reference corpus.

    Per topic W: v(w) = [NPMI(w, w') for w' in W]; each v(w) is compared with
    the summed vector of all of W (one-set segmentation) by cosine; the topic
    value is the mean, clamped into [0, 1]. Topic words missing from the
    corpus fail fast, naming them.
    """
    if not topics:
        raise CoherenceError("need at least one topic")
    for index, topic in enumerate(topics):
        if not topic:
            raise CoherenceError(f"topic {index} is empty")
    all_words = {w for topic in topics for w in topic}
    stats = WindowStats.from_streams(streams, window_size, terms=all_words)
    per_topic: list[float] = []
    for index, topic in enumerate(topics):
        missing = sorted(w for w in topic if stats.term_counts.get(w, 0) == 0)
        if missing:
            raise CoherenceError(f"topic {index}: words missing from corpus: {missing}")
        words = list(topic)
        vectors = np.array(
            [[npmi(stats, w, other, eps) for other in words] for w in words],
            dtype=np.float64,
        )
        summed = vectors.sum(axis=0)
        sims: list[float] = []
        for row in vectors:
            nr = float(np.linalg.norm(row))
            ns = float(np.linalg.norm(summed))
            if nr == 0.0 or ns == 0.0:
                sims.append(0.0)
            else:
                sims.append(float(np.dot(row, summed) / (nr * ns)))
        value = float(np.mean(sims))
        per_topic.append(min(1.0, max(0.0, value)))
    return CoherenceReport(
        per_topic=tuple(per_topic),
        mean=float(np.mean(per_topic)),
        window_size=window_size,
        eps=eps,
    )


def topic_diversity(topics: Sequence[Sequence[str]]) -> float:
    """Fraction of unique words over all topic-word slots."""
    if not topics:
        raise CoherenceError("need at least one topic")
    for index, topic in enumerate(topics):
        if not topic:
            raise CoherenceError(f"topic {index} is empty")
    slots = sum(len(topic) for topic in topics)
    unique = len({w for topic in topics for w in topic})
    return unique / slots
