"""Labeling sessions, inter-annotator agreement, and dataset assembly.

Persistence is an append-only JSONL event log per session; session state is
always derived by replaying the log, never stored. Re-labeling a slot appends
a superseding event, so the log stays an audit trail of the human loop.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Collection, Iterable, Mapping, Sequence

from .errors import AnnotationError
from .retrieval import RankedList

ADJUDICATOR = "_adjudication"

UNLABELED = "unlabeled"
LABELED = "labeled"
SKIPPED = "skipped"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class LabelEvent:
    """One labeling action; ``label`` None records a skip."""

    session_id: str
    review_id: str
    annotator: str
    label: int | None
    timestamp: str
    source: str = "human"

    def __post_init__(self) -> None:
        if self.label not in (0, 1, None):
            raise AnnotationError(f"label must be 0, 1, or a skip, got {self.label!r}")
        if self.source not in ("human", "adjudication"):
            raise AnnotationError(f"unknown event source {self.source!r}")

    def to_json(self) -> dict:
        return {
            "type": "label",
            "session_id": self.session_id,
            "review_id": self.review_id,
            "annotator": self.annotator,
            "label": self.label,
            "timestamp": self.timestamp,
            "source": self.source,
        }


class AnnotationSession:
    """Replayable labeling state for one candidate batch and its annotators."""

    def __init__(self, session_id: str, candidate_ids: Sequence[str], annotators: Sequence[str]) -> None:
        if not candidate_ids:
            raise AnnotationError("session needs at least one candidate")
        if not annotators:
            raise AnnotationError("session needs at least one annotator")
        if len(set(candidate_ids)) != len(candidate_ids):
            raise AnnotationError("candidate ids must be unique")
        if len(set(annotators)) != len(annotators):
            raise AnnotationError("annotator names must be unique")
        if ADJUDICATOR in annotators:
            raise AnnotationError(f"annotator name {ADJUDICATOR!r} is reserved")
        self.id = session_id
        self.candidate_ids = tuple(candidate_ids)
        self.annotators = tuple(annotators)
        self.events: list[LabelEvent] = []
        # Latest event per (annotator, review); replay order decides.
        self._latest: dict[tuple[str, str], LabelEvent] = {}

    def apply(self, event: LabelEvent) -> None:
        if event.session_id != self.id:
            raise AnnotationError(f"event for session {event.session_id!r} applied to {self.id!r}")
        if event.review_id not in self.candidate_ids:
            raise AnnotationError(f"unknown review id {event.review_id!r}")
        if event.annotator != ADJUDICATOR and event.annotator not in self.annotators:
            raise AnnotationError(f"unknown annotator {event.annotator!r}")
        if event.annotator == ADJUDICATOR and event.source != "adjudication":
            raise AnnotationError("adjudicator events must have source=adjudication")
        self.events.append(event)
        self._latest[(event.annotator, event.review_id)] = event

    def status(self, annotator: str, review_id: str) -> str:
        event = self._latest.get((annotator, review_id))
        if event is None:
            return UNLABELED
        return SKIPPED if event.label is None else LABELED

    def label_of(self, annotator: str, review_id: str) -> int | None:
        event = self._latest.get((annotator, review_id))
        return None if event is None else event.label

    def next_unlabeled(self, annotator: str) -> str | None:
        """First candidate this annotator has neither labeled nor skipped."""
        if annotator not in self.annotators:
            raise AnnotationError(f"unknown annotator {annotator!r}")
        for review_id in self.candidate_ids:
            if self.status(annotator, review_id) == UNLABELED:
                return review_id
        return None

    def progress(self, annotator: str) -> dict[str, int]:
        counts = {UNLABELED: 0, LABELED: 0, SKIPPED: 0}
        for review_id in self.candidate_ids:
            counts[self.status(annotator, review_id)] += 1
        return counts

    def doubly_labeled(self) -> list[str]:
        """Candidates labeled (not skipped) by both of the first two annotators."""
        if len(self.annotators) < 2:
            return []
        first, second = self.annotators[0], self.annotators[1]
        return [
            rid
            for rid in self.candidate_ids
            if self.status(first, rid) == LABELED and self.status(second, rid) == LABELED
        ]


def create_session(
    candidates: RankedList | Sequence[str],
    annotators: Sequence[str],
    session_id: str = "session",
) -> AnnotationSession:
    ids = candidates.ids() if isinstance(candidates, RankedList) else list(candidates)
    return AnnotationSession(session_id, ids, annotators)


def record_label(
    session: AnnotationSession,
    review_id: str,
    annotator: str,
    label: int | None,
    timestamp: str | None = None,
    source: str = "human",
) -> LabelEvent:
    """Append one labeling event (``label=None`` is a skip) and apply it."""
    event = LabelEvent(
        session_id=session.id,
        review_id=review_id,
        annotator=annotator,
        label=label,
        timestamp=timestamp if timestamp is not None else _now(),
        source=source,
    )
    session.apply(event)
    return event


def cohen_kappa(session: AnnotationSession) -> float:
    """Agreement between the session's two annotators over doubly-labeled items.

    kappa = (p_o - p_e) / (1 - p_e); skipped and single-labeled items are
    excluded. Degenerate chance agreement (p_e = 1) forces p_o = 1 and the
    kappa is reported as 1.0.
    """
    if len(session.annotators) != 2:
        raise AnnotationError("kappa is pairwise: session must have exactly 2 annotators")
    first, second = session.annotators
    pairs = [
        (session.label_of(first, rid), session.label_of(second, rid))
        for rid in session.doubly_labeled()
    ]
    if not pairs:
        raise AnnotationError("kappa undefined: no review labeled by both annotators")
    n = len(pairs)
    agree = sum(1 for a, b in pairs if a == b)
    p_first_1 = sum(1 for a, _ in pairs if a == 1) / n
    p_second_1 = sum(1 for _, b in pairs if b == 1) / n
    p_o = agree / n
    p_e = p_first_1 * p_second_1 + (1 - p_first_1) * (1 - p_second_1)
    if p_e == 1.0:
        return 1.0
    return (p_o - p_e) / (1 - p_e)


@dataclass(frozen=True)
class LabeledDataset:
    """Final (review_id, label) pairs after adjudication and balancing."""

    items: tuple[tuple[str, int], ...]
    provenance: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        ids = [rid for rid, _ in self.items]
        if len(set(ids)) != len(ids):
            raise AnnotationError("dataset assigns multiple labels to one review id")
        for rid, label in self.items:
            if label not in (0, 1):
                raise AnnotationError(f"label for {rid!r} must be 0 or 1")

    @property
    def balance(self) -> dict[int, int]:
        counts = {0: 0, 1: 0}
        for _, label in self.items:
            counts[label] += 1
        return counts

    def ids(self) -> list[str]:
        return [rid for rid, _ in self.items]

    def labels(self) -> dict[str, int]:
        return dict(self.items)

    def __len__(self) -> int:
        return len(self.items)


def adjudicate(
    session: AnnotationSession,
    resolutions: Mapping[str, int] | None = None,
    drop: Collection[str] = (),
) -> LabeledDataset:
    """Merge annotator labels into one final label per retained review.

    Agreed doubly-labeled items keep their common label. Disagreements must
    appear in ``resolutions`` or ``drop``, otherwise this fails listing them.
    Single-labeled items are dropped unless a resolution covers them. Every
    resolution is logged onto the session with source=adjudication.
    """
    resolutions = dict(resolutions or {})
    drop_set = set(drop)
    for rid in list(resolutions) + list(drop_set):
        if rid not in session.candidate_ids:
            raise AnnotationError(f"resolution for unknown review id {rid!r}")
    if len(session.annotators) != 2:
        raise AnnotationError("adjudication expects exactly 2 annotators")
    first, second = session.annotators

    final: dict[str, int] = {}
    resolved: list[str] = []
    unresolved: list[str] = []
    for rid in session.candidate_ids:
        if rid in drop_set:
            continue
        if rid in resolutions:
            final[rid] = resolutions[rid]
            resolved.append(rid)
            continue
        a, b = session.label_of(first, rid), session.label_of(second, rid)
        a_ok = session.status(first, rid) == LABELED
        b_ok = session.status(second, rid) == LABELED
        if a_ok and b_ok:
            if a == b:
                final[rid] = a  # type: ignore[assignment]
            else:
                unresolved.append(rid)
        # single- or un-labeled items fall out unless resolved above
    if unresolved:
        raise AnnotationError(
            f"unresolved disagreements need adjudication: {unresolved}"
        )
    for rid in resolved:
        record_label(session, rid, ADJUDICATOR, final[rid], source="adjudication")
    return LabeledDataset(
        items=tuple((rid, final[rid]) for rid in session.candidate_ids if rid in final),
        provenance=(session.id,),
    )


def undersample_balance(dataset: LabeledDataset, seed: int) -> LabeledDataset:
    """Randomly discard majority-class items until both classes have equal counts."""
    by_label: dict[int, list[str]] = {0: [], 1: []}
    for rid, label in dataset.items:
        by_label[label].append(rid)
    if not by_label[0] or not by_label[1]:
        raise AnnotationError("undersampling needs both classes nonempty")
    minority = min(by_label, key=lambda lbl: (len(by_label[lbl]), lbl))
    majority = 1 - minority
    target = len(by_label[minority])
    if len(by_label[majority]) == target:
        return dataset
    rng = random.Random(seed)
    kept_majority = set(rng.sample(by_label[majority], target))
    items = tuple(
        (rid, label)
        for rid, label in dataset.items
        if label == minority or rid in kept_majority
    )
    return LabeledDataset(items=items, provenance=dataset.provenance)


def train_test_split(
    dataset: LabeledDataset,
    ratio: float,
    seed: int,
) -> tuple[LabeledDataset, LabeledDataset]:
    """Stratified split; ``ratio`` is the train fraction, per-class test size is rounded."""
    if not 0.0 < ratio < 1.0:
        raise AnnotationError(f"ratio must be in (0, 1), got {ratio}")
    if not dataset.items:
        raise AnnotationError("cannot split an empty dataset")
    rng = random.Random(seed)
    test_ids: set[str] = set()
    for label in (0, 1):
        ids = [rid for rid, lbl in dataset.items if lbl == label]
        if not ids:
            continue
        shuffled = ids[:]
        rng.shuffle(shuffled)
        n_test = int(round((1.0 - ratio) * len(ids)))
        test_ids.update(shuffled[:n_test])
    train = LabeledDataset(
        items=tuple(item for item in dataset.items if item[0] not in test_ids),
        provenance=dataset.provenance,
    )
    test = LabeledDataset(
        items=tuple(item for item in dataset.items if item[0] in test_ids),
        provenance=dataset.provenance,
    )
    present = {label for _, label in dataset.items}
    for part, name in ((train, "train"), (test, "test")):
        counts = part.balance
        for label in present:
            if counts[label] == 0:
                raise AnnotationError(f"split leaves class {label} empty in {name} part")
    return train, test


def save_dataset(dataset: LabeledDataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for rid, label in dataset.items:
            handle.write(json.dumps({"id": rid, "label": label}) + "\n")


def load_dataset(path: str | Path) -> LabeledDataset:
    items: list[tuple[str, int]] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AnnotationError(f"{path}: line {lineno}: malformed JSON: {exc.msg}") from None
            if "id" not in record or "label" not in record:
                raise AnnotationError(f"{path}: line {lineno}: need both 'id' and 'label'")
            items.append((str(record["id"]), int(record["label"])))
    return LabeledDataset(items=tuple(items))


class SessionStore:
    """Directory of per-session JSONL logs; the log is the source of truth."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, session_id: str) -> Path:
        safe = session_id.replace("/", "_")
        return self.root / f"{safe}.jsonl"

    def exists(self, session_id: str) -> bool:
        return self._path(session_id).exists()

    def list_sessions(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.jsonl"))

    def create(
        self,
        session_id: str,
        candidates: RankedList | Sequence[str],
        annotators: Sequence[str],
    ) -> AnnotationSession:
        if self.exists(session_id):
            raise AnnotationError(f"session {session_id!r} already exists")
        session = create_session(candidates, annotators, session_id=session_id)
        header = {
            "type": "session",
            "id": session.id,
            "candidates": list(session.candidate_ids),
            "annotators": list(session.annotators),
        }
        with open(self._path(session_id), "w", encoding="utf-8") as handle:
            handle.write(json.dumps(header) + "\n")
        return session

    def load(self, session_id: str) -> AnnotationSession:
        path = self._path(session_id)
        if not path.exists():
            raise AnnotationError(f"no such session {session_id!r}")
        session: AnnotationSession | None = None
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                record = json.loads(line)
                if record.get("type") == "session":
                    session = AnnotationSession(
                        record["id"], record["candidates"], record["annotators"]
                    )
                elif record.get("type") == "label":
                    if session is None:
                        raise AnnotationError(f"{path}: line {lineno}: event before session header")
                    session.apply(
                        LabelEvent(
                            session_id=record["session_id"],
                            review_id=record["review_id"],
                            annotator=record["annotator"],
                            label=record["label"],
                            timestamp=record["timestamp"],
                            source=record.get("source", "human"),
                        )
                    )
                else:
                    raise AnnotationError(f"{path}: line {lineno}: unknown record type")
        if session is None:
            raise AnnotationError(f"{path}: missing session header")
        return session

    def append(self, event: LabelEvent) -> None:
        with open(self._path(event.session_id), "a", encoding="utf-8") as handle:
            handle.write(json.dumps(event.to_json()) + "\n")

    def record(
        self,
        session: AnnotationSession,
        review_id: str,
        annotator: str,
        label: int | None,
    ) -> LabelEvent:
        """Apply and persist one labeling event."""
        event = record_label(session, review_id, annotator, label)
        self.append(event)
        return event
