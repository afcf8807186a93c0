"""Rank-based AUC for binary and one-vs-rest multiclass scoring."""

from __future__ import annotations

import numpy as np

from .errors import UndefinedMetricError


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties receiving the mean of their positions."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auc_binary(scores: np.ndarray, positives: np.ndarray) -> float:
    """Rank-statistic AUC of `scores` for the boolean positive mask."""
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    n_pos = int(positives.sum())
    n_neg = len(positives) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("binary AUC needs both classes present")
    ranks = _midranks(scores)
    rank_sum = float(ranks[positives].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def auc_ovr(scores: np.ndarray, labels: np.ndarray) -> float:
    """Unweighted mean of per-class one-vs-rest AUCs over classes present.

    `scores` holds one row of class scores per instance.  Classes absent
    from `labels` are skipped; fewer than two present classes is an error.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 2 or len(scores) != len(labels):
        raise ValueError("scores must be (N, C) aligned with labels")
    present = np.unique(labels)
    if len(present) < 2:
        raise UndefinedMetricError("one-vs-rest AUC needs >= 2 classes present")
    per_class = [auc_binary(scores[:, int(c)], labels == c) for c in present]
    return float(np.mean(per_class))
