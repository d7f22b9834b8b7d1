"""
Classification metrics for the evaluation tables: accuracy, support-weighted precision,
recall and F1, and Cohen's kappa, all derived from one confusion matrix. Adjusted Rand
index scores clustering recovery.
"""

from dataclasses import astuple, dataclass, fields

import numpy as np
import sklearn.metrics as skm

from errors import ShapeError

REPORT_COLUMNS = ["accuracy", "weighted_precision", "weighted_recall", "weighted_f1", "kappa"]


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """counts[t, p]: rows are true classes, columns predicted classes."""
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def class_count(self) -> int:
        return self.counts.shape[0]


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    kappa: float

    def as_row(self) -> list[float]:
        return list(astuple(self))

    @classmethod
    def nan(cls) -> "MetricsReport":
        return cls(*([float("nan")] * len(fields(cls))))


def confusion(true_labels, predicted_labels, class_count: int) -> ConfusionMatrix:
    truth = np.asarray(true_labels, dtype=np.int64).reshape(-1)
    pred = np.asarray(predicted_labels, dtype=np.int64).reshape(-1)
    if truth.shape != pred.shape:
        raise ShapeError(f"{truth.shape[0]} true labels but {pred.shape[0]} predictions")
    for name, labels in (("true", truth), ("predicted", pred)):
        if labels.size and (labels.min() < 0 or labels.max() >= class_count):
            raise ShapeError(f"{name} label out of range 0..{class_count - 1}")
    if truth.size == 0:
        return ConfusionMatrix(np.zeros((class_count, class_count), dtype=np.int64))
    counts = skm.confusion_matrix(truth, pred, labels=np.arange(class_count))
    return ConfusionMatrix(counts.astype(np.int64))


def _safe_divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    return np.divide(num, den, out=np.zeros_like(num, dtype=float), where=den > 0)


def report(cm: ConfusionMatrix) -> MetricsReport:
    """
    Undefined per-class precision/recall count as 0, F1 is 0 when both are 0, and kappa is
    0 when chance agreement p_e is 1.
    """
    counts = cm.counts.astype(float)
    total = counts.sum()
    if total <= 0:
        raise ShapeError("cannot report on an empty confusion matrix")
    tp = np.diag(counts)
    support = counts.sum(axis=1)
    predicted = counts.sum(axis=0)

    precision = _safe_divide(tp, predicted)
    recall = _safe_divide(tp, support)
    f1 = _safe_divide(2.0 * precision * recall, precision + recall)
    weights = support / total

    p_o = tp.sum() / total
    p_e = float((support * predicted).sum() / (total * total))
    kappa = 0.0 if p_e >= 1.0 else (p_o - p_e) / (1.0 - p_e)

    return MetricsReport(
        accuracy=float(p_o),
        weighted_precision=float((weights * precision).sum()),
        weighted_recall=float((weights * recall).sum()),
        weighted_f1=float((weights * f1).sum()),
        kappa=float(kappa),
    )


def evaluate(true_labels, predicted_labels, class_count: int) -> MetricsReport:
    return report(confusion(true_labels, predicted_labels, class_count))


def adjusted_rand(labels_a, labels_b) -> float:
    a = np.asarray(labels_a).reshape(-1)
    b = np.asarray(labels_b).reshape(-1)
    if a.shape != b.shape:
        raise ShapeError(f"partitions have lengths {a.shape[0]} and {b.shape[0]}")
    if a.shape[0] < 2:
        raise ShapeError("adjusted Rand index needs at least 2 points")
    return float(skm.adjusted_rand_score(a, b))
