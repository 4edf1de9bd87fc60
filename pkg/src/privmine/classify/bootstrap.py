"""Iterative keyword-matching baseline with a human (or scripted) judge.

Each round marks reviews containing any approved keyword as positive, mines
new candidate keywords from the newly positive reviews, and asks the judge to
approve or reject them. The F1-vs-iteration curve exposes the rise-then-fall
behaviour of keyword bootstrapping when an off-topic keyword slips in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Collection, Mapping, Sequence

from ..corpus import TokenStream
from ..errors import ClassifyError
from ..topics import ctfidf
from .metrics import evaluate

Judge = Callable[[int, Sequence[str]], Collection[str]]


@dataclass(frozen=True)
class KeywordSet:
    iteration: int
    keywords: frozenset[str]
    approved_by: str | None = None


@dataclass(frozen=True)
class BootstrapIteration:
    """State after one matching round: keywords in force, predictions, score."""

    keyword_set: KeywordSet
    predicted: Mapping[str, int]
    f1: float | None
    candidates: tuple[str, ...] = ()
    newly_approved: tuple[str, ...] = field(default=())


def mine_candidate_keywords(
    streams: Sequence[TokenStream],
    newly_positive: set[str],
    excluded: set[str],
    top_n: int,
) -> list[str]:
    """Top new terms scored by cluster TF-IDF of (newly positive) vs (the rest)."""
    positive = [s for s in streams if s.doc_id in newly_positive]
    rest = [s for s in streams if s.doc_id not in newly_positive]
    if not any(s.tokens for s in positive):
        return []
    scores = ctfidf({0: positive, 1: rest})[0]
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return [term for term, _ in ranked if term not in excluded][:top_n]


def bootstrap_baseline(
    streams: Sequence[TokenStream],
    seed_keywords: Collection[str],
    judge: Judge,
    max_iters: int = 10,
    truth: Mapping[str, int] | None = None,
    candidates_per_iter: int = 5,
) -> list[BootstrapIteration]:
    """Run the keyword bootstrap; returns one record per completed iteration.

    ``truth`` (doc_id -> 0/1) enables the per-iteration F1; without it the
    curve entries carry ``f1=None``. The judge sees the mined candidates each
    round and returns the subset it approves; an empty approval ends the run.
    """
    approved = {k.lower() for k in seed_keywords}
    if not approved:
        raise ClassifyError("bootstrap needs a nonempty seed keyword set")
    if max_iters < 1:
        raise ClassifyError(f"max_iters must be >= 1, got {max_iters}")
    rejected: set[str] = set()
    prev_positive: set[str] = set()
    history: list[BootstrapIteration] = []
    for iteration in range(1, max_iters + 1):
        positive = {s.doc_id for s in streams if approved.intersection(s.tokens)}
        predicted = {s.doc_id: 1 if s.doc_id in positive else 0 for s in streams}
        f1: float | None = None
        if truth is not None:
            ids = [s.doc_id for s in streams]
            f1 = evaluate([predicted[i] for i in ids], [truth[i] for i in ids]).f1
        newly_positive = positive - prev_positive
        candidates: list[str] = []
        if newly_positive and iteration < max_iters:
            candidates = mine_candidate_keywords(
                streams, newly_positive, approved | rejected, candidates_per_iter
            )
        newly_approved: tuple[str, ...] = ()
        if candidates:
            approvals = {k.lower() for k in judge(iteration, list(candidates))}
            newly_approved = tuple(k for k in candidates if k in approvals)
            rejected.update(k for k in candidates if k not in approvals)
        history.append(
            BootstrapIteration(
                keyword_set=KeywordSet(iteration=iteration, keywords=frozenset(approved)),
                predicted=predicted,
                f1=f1,
                candidates=tuple(candidates),
                newly_approved=newly_approved,
            )
        )
        if not newly_approved:
            break
        approved.update(newly_approved)
        prev_positive = positive
    return history
