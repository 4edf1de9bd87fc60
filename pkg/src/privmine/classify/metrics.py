"""Precision / recall / F1 and the confusion matrix, label 1 = positive."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..errors import ClassifyError


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def precision(self) -> float:
        denom = self.tp + self.fp
        return self.tp / denom if denom else 0.0

    @property
    def recall(self) -> float:
        denom = self.tp + self.fn
        return self.tp / denom if denom else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r) if p + r else 0.0

    @property
    def confusion(self) -> tuple[int, int, int, int]:
        return (self.tp, self.fp, self.fn, self.tn)

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
        }


def report_from_confusion(tp: int, fp: int, fn: int, tn: int) -> EvalReport:
    return EvalReport(tp=tp, fp=fp, fn=fn, tn=tn)


def evaluate(pred: Sequence[int], truth: Sequence[int]) -> EvalReport:
    """Count the confusion matrix of predictions against ground truth."""
    if len(pred) != len(truth):
        raise ClassifyError(f"length mismatch: {len(pred)} predictions vs {len(truth)} labels")
    if not truth:
        raise ClassifyError("cannot evaluate empty label sequences")
    tp = fp = fn = tn = 0
    for p, t in zip(pred, truth):
        if p not in (0, 1) or t not in (0, 1):
            raise ClassifyError(f"labels must be 0 or 1, got pred={p!r} truth={t!r}")
        if p == 1 and t == 1:
            tp += 1
        elif p == 1 and t == 0:
            fp += 1
        elif p == 0 and t == 1:
            fn += 1
        else:
            tn += 1
    return EvalReport(tp=tp, fp=fp, fn=fn, tn=tn)
