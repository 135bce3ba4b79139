"""Confusion-matrix bookkeeping and the derived classification metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError


@dataclass
class ConfusionMatrix:
    """Square count matrix; rows are true classes, columns predictions."""

    counts: np.ndarray
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise DataError("confusion matrix must be square")
        if counts.size and not np.all(np.equal(np.mod(counts, 1), 0)):
            raise DataError("confusion counts must be integers")
        counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise DataError("confusion counts must be nonnegative")
        self.counts = counts
        names = tuple(self.class_names)
        if not names:
            names = tuple(f"class_{i}" for i in range(counts.shape[0]))
        elif len(names) != counts.shape[0]:
            raise DataError("class name count does not match matrix size")
        self.class_names = names

    @staticmethod
    def empty(n_classes: int, class_names: tuple[str, ...] = ()) -> "ConfusionMatrix":
        return ConfusionMatrix(np.zeros((n_classes, n_classes), dtype=np.int64), class_names)

    @staticmethod
    def from_predictions(
        y_true, y_pred, n_classes: int, class_names: tuple[str, ...] = ()
    ) -> "ConfusionMatrix":
        y_true = np.asarray(y_true, dtype=np.int64)
        y_pred = np.asarray(y_pred, dtype=np.int64)
        if y_true.shape != y_pred.shape:
            raise DataError("prediction and label counts differ")
        if y_true.size and (
            y_true.min() < 0
            or y_true.max() >= n_classes
            or y_pred.min() < 0
            or y_pred.max() >= n_classes
        ):
            raise DataError("class index outside [0, n_classes)")
        counts = np.zeros((n_classes, n_classes), dtype=np.int64)
        np.add.at(counts, (y_true, y_pred), 1)
        return ConfusionMatrix(counts, class_names)

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def add(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.n_classes != self.n_classes:
            raise DataError("cannot add confusion matrices of different sizes")
        return ConfusionMatrix(self.counts + other.counts, self.class_names)


@dataclass(frozen=True)
class MetricSummary:
    accuracy: float
    macro_f1: float
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]


def metrics(cm: ConfusionMatrix) -> MetricSummary:
    """Accuracy, macro F1, and per-class precision/recall from counts.

    A zero denominator yields 0 for that class; classes with P + R = 0
    contribute 0 to the macro F1 sum while still counting in its divisor.
    """
    counts = cm.counts.astype(np.float64)
    total = counts.sum()
    if total <= 0:
        raise DataError("confusion matrix holds no observations")
    accuracy = float(np.trace(counts) / total)
    tp = np.diag(counts)
    pred_totals = counts.sum(axis=0)
    true_totals = counts.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(pred_totals > 0, tp / pred_totals, 0.0)
        recall = np.where(true_totals > 0, tp / true_totals, 0.0)
        pr = precision + recall
        f1 = np.where(pr > 0, 2.0 * precision * recall / np.where(pr > 0, pr, 1.0), 0.0)
    macro_f1 = float(f1.sum() / cm.n_classes)
    return MetricSummary(
        accuracy,
        macro_f1,
        tuple(float(p) for p in precision),
        tuple(float(r) for r in recall),
        tuple(float(v) for v in f1),
    )
