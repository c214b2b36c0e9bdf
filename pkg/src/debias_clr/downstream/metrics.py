"""Binary-classification metrics over 2x2 confusion counts."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch

__all__ = ["confusion_counts", "accuracy", "mcc", "cohen_kappa"]


def confusion_counts(y_true, y_pred) -> tuple[int, int, int, int]:
    """(tp, fp, fn, tn) with label 1 as the positive class."""
    t = np.asarray(y_true).astype(np.int64)
    p = np.asarray(y_pred).astype(np.int64)
    if t.shape != p.shape:
        raise DimensionMismatch("prediction/label length mismatch")
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == 0) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == 0)))
    tn = int(np.sum((t == 0) & (p == 0)))
    return tp, fp, fn, tn


def _unpack(confusion) -> tuple[int, int, int, int]:
    arr = np.asarray(confusion)
    if arr.shape == (2, 2):
        # Layout [[tp, fn], [fp, tn]]: rows = truth (1 first), cols = prediction.
        return int(arr[0, 0]), int(arr[1, 0]), int(arr[0, 1]), int(arr[1, 1])
    if arr.shape == (4,):
        return tuple(int(v) for v in arr)
    raise DimensionMismatch("confusion must be (tp, fp, fn, tn) or a 2x2 matrix")


def accuracy(confusion) -> float:
    tp, fp, fn, tn = _unpack(confusion)
    total = tp + fp + fn + tn
    return (tp + tn) / total if total else 0.0


def mcc(confusion) -> float:
    """Matthews correlation; 0 by convention when any marginal is empty."""
    tp, fp, fn, tn = _unpack(confusion)
    denom2 = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom2 == 0:
        return 0.0
    return (tp * tn - fp * fn) / float(np.sqrt(denom2))


def cohen_kappa(confusion) -> float:
    """Chance-corrected agreement; 0 by convention when chance agreement is 1."""
    tp, fp, fn, tn = _unpack(confusion)
    n = tp + fp + fn + tn
    if n == 0:
        return 0.0
    po = (tp + tn) / n
    pe = ((tp + fn) * (tp + fp) + (tn + fp) * (tn + fn)) / (n * n)
    if pe >= 1.0:
        return 0.0
    return (po - pe) / (1.0 - pe)
