"""Confusion-matrix based evaluation metrics.

Binary runs report the positive class (label 1); multi-class runs report
macro-averaged precision/recall/F1 (unweighted mean over one-vs-rest
scores). A zero denominator defines the metric as 0 and flags it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from riskgraph.errors import FormatError


@dataclass
class ConfusionMatrix:
    """counts[actual, predicted] over the evaluated users."""

    counts: np.ndarray

    @property
    def class_count(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def per_class(self, cls: int) -> tuple[int, int, int, int]:
        """(TP, FP, TN, FN) treating cls as the positive class."""
        tp = int(self.counts[cls, cls])
        fp = int(self.counts[:, cls].sum() - tp)
        fn = int(self.counts[cls, :].sum() - tp)
        tn = self.total - tp - fp - fn
        return tp, fp, tn, fn

    def to_rows(self) -> list[list[int]]:
        return self.counts.astype(int).tolist()


def confusion_from_pairs(
    y_true: Sequence[int], y_pred: Sequence[int], class_count: int
) -> ConfusionMatrix:
    if len(y_true) != len(y_pred):
        raise FormatError("label/prediction length mismatch")
    counts = np.zeros((class_count, class_count), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        counts[t, p] += 1
    return ConfusionMatrix(counts=counts)


@dataclass
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    macro_f1: float | None = None
    degenerate: tuple[str, ...] = ()

    def to_text(self) -> str:
        lines = [
            f"accuracy = {self.accuracy!r}",
            f"precision = {self.precision!r}",
            f"recall = {self.recall!r}",
            f"f1 = {self.f1!r}",
        ]
        if self.macro_f1 is not None:
            lines.append(f"macro_f1 = {self.macro_f1!r}")
        if self.degenerate:
            lines.append(f"degenerate = {','.join(self.degenerate)}")
        return "\n".join(lines) + "\n"


def _safe_div(num: float, den: float, name: str, flags: list[str]) -> float:
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def metrics_from_confusion(cm: ConfusionMatrix) -> MetricsReport:
    """Compute the metric formulas exactly from the confusion counts."""
    flags: list[str] = []
    total = cm.total
    if total == 0:
        raise FormatError("empty confusion matrix")
    correct = int(np.trace(cm.counts))
    accuracy = correct / total

    if cm.class_count == 2:
        tp, fp, tn, fn = cm.per_class(1)
        precision = _safe_div(tp, tp + fp, "precision", flags)
        recall = _safe_div(tp, tp + fn, "recall", flags)
        f1 = _safe_div(2 * precision * recall, precision + recall, "f1", flags)
        return MetricsReport(
            accuracy=accuracy,
            precision=precision,
            recall=recall,
            f1=f1,
            macro_f1=None,
            degenerate=tuple(flags),
        )

    precisions, recalls, f1s = [], [], []
    for cls in range(cm.class_count):
        tp, fp, tn, fn = cm.per_class(cls)
        p = _safe_div(tp, tp + fp, f"precision[{cls}]", flags)
        r = _safe_div(tp, tp + fn, f"recall[{cls}]", flags)
        f = _safe_div(2 * p * r, p + r, f"f1[{cls}]", flags)
        precisions.append(p)
        recalls.append(r)
        f1s.append(f)
    macro_f1 = float(np.mean(f1s))
    return MetricsReport(
        accuracy=accuracy,
        precision=float(np.mean(precisions)),
        recall=float(np.mean(recalls)),
        f1=macro_f1,
        macro_f1=macro_f1,
        degenerate=tuple(flags),
    )
