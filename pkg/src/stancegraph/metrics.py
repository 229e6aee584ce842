"""Classification metrics from a confusion matrix.

Zero-division convention: a class with undefined precision or recall
(no predicted or no actual positives) contributes 0 to that quantity, and
an F1 with P + R = 0 is 0.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class Metrics:
    accuracy: float
    macro_f1: float
    precision: np.ndarray  # (Y,)
    recall: np.ndarray     # (Y,)
    f1: np.ndarray         # (Y,)
    support: np.ndarray    # (Y,) actual count per class
    confusion: np.ndarray  # (Y, Y) rows = actual, cols = predicted

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "per_class": [
                {
                    "precision": float(self.precision[c]),
                    "recall": float(self.recall[c]),
                    "f1": float(self.f1[c]),
                    "support": int(self.support[c]),
                }
                for c in range(len(self.f1))
            ],
            "confusion": self.confusion.tolist(),
        }


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must have equal length")
    if y_true.size == 0:
        raise ValueError("cannot compute metrics on an empty set")
    for arr in (y_true, y_pred):
        if arr.min() < 0 or arr.max() >= n_classes:
            raise ValueError("class index outside range")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def metrics_from_confusion(cm: np.ndarray) -> Metrics:
    cm = np.asarray(cm, dtype=np.int64)
    n_classes = cm.shape[0]
    diag = np.diag(cm).astype(np.float64)
    predicted = cm.sum(axis=0).astype(np.float64)
    actual = cm.sum(axis=1).astype(np.float64)
    precision = np.divide(diag, predicted, out=np.zeros(n_classes), where=predicted > 0)
    recall = np.divide(diag, actual, out=np.zeros(n_classes), where=actual > 0)
    pr = precision + recall
    f1 = np.divide(2 * precision * recall, pr, out=np.zeros(n_classes), where=pr > 0)
    return Metrics(
        accuracy=float(diag.sum() / cm.sum()),
        macro_f1=float(f1.sum() / n_classes),
        precision=precision,
        recall=recall,
        f1=f1,
        support=cm.sum(axis=1),
        confusion=cm,
    )


def compute_metrics(y_true, y_pred, n_classes: int) -> Metrics:
    return metrics_from_confusion(confusion_matrix(y_true, y_pred, n_classes))
