"""Clustering and outlier-classification scores."""

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError


def _pairs(c):
    return c * (c - 1) // 2


def adjusted_rand_index(a, b):
    """Hubert-Arabie adjusted Rand index; the outlier label is an ordinary class.

    Pair counts are exact integers and the ratio is formed as a Fraction, so
    there is no overflow or cancellation at any n.
    """
    a, b = list(a), list(b)
    if len(a) != len(b):
        raise DomainError(f"label vectors differ in length ({len(a)} vs {len(b)})")
    n = len(a)
    index = sum(_pairs(c) for c in Counter(zip(a, b)).values())
    sum_a = sum(_pairs(c) for c in Counter(a).values())
    sum_b = sum(_pairs(c) for c in Counter(b).values())
    total = _pairs(n)
    if total == 0:
        return 1.0
    expected = Fraction(sum_a * sum_b, total)
    maximum = Fraction(sum_a + sum_b, 2)
    if maximum == expected:
        return 1.0
    return float((index - expected) / (maximum - expected))


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def to_dict(self):
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def outlier_f1(predicted_outliers, true_outliers, n):
    """F1 with outliers as the positive class; 0 when there is no true positive."""
    pred, true = set(predicted_outliers), set(true_outliers)
    if any(not 0 <= i < n for i in pred | true):
        raise DomainError("outlier index outside 0..n-1")
    tp = len(pred & true)
    fp = len(pred - true)
    fn = len(true - pred)
    counts = ConfusionCounts(tp, fp, fn, n - tp - fp - fn)
    if tp == 0:
        return 0.0, counts
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall), counts
