"""Evaluation metrics: average precision, correlations, balanced accuracy."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import groupby
from typing import Sequence

import numpy as np


class MetricUndefinedError(ValueError):
    """Raised when a metric is undefined for the given inputs."""


@dataclass(frozen=True, slots=True)
class RankedSample:
    """A scored sample; higher score means more hallucinated."""

    score: float
    label: int
    passage_id: str | None = None
    sentence_index: int | None = None


def average_precision(samples: Sequence[RankedSample]) -> float:
    """Step-wise AP over descending scores; equal-score samples enter as one group."""
    if not samples:
        raise MetricUndefinedError("average precision needs at least one sample")
    num_pos = sum(1 for s in samples if s.label == 1)
    if num_pos == 0:
        raise MetricUndefinedError("average precision undefined without positive samples")

    ordered = sorted(samples, key=lambda s: -s.score)
    ap = 0.0
    tp = 0
    seen = 0
    prev_recall = 0.0
    for _, group in groupby(ordered, key=lambda s: s.score):
        members = list(group)
        seen += len(members)
        tp += sum(1 for s in members if s.label == 1)
        precision = tp / seen
        recall = tp / num_pos
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return ap


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation."""
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise MetricUndefinedError("pearson needs two equal-length vectors of size >= 2")
    a = a - a.mean()
    b = b - b.mean()
    denom = float(np.sqrt(np.sum(a * a) * np.sum(b * b)))
    if denom == 0.0 or not np.isfinite(denom):
        raise MetricUndefinedError("pearson undefined for zero-variance input")
    return float(np.sum(a * b) / denom)


def rank_average_ties(x: Sequence[float]) -> np.ndarray:
    """1-based ranks; tied values share the average of their positions."""
    a = np.asarray(x, dtype=np.float64)
    order = np.argsort(a, kind="mergesort")
    ranks = np.empty(a.size, dtype=np.float64)
    i = 0
    while i < a.size:
        j = i
        while j + 1 < a.size and a[order[j + 1]] == a[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average-tie ranks."""
    if len(x) != len(y) or len(x) < 2:
        raise MetricUndefinedError("spearman needs two equal-length vectors of size >= 2")
    return pearson(rank_average_ties(x), rank_average_ties(y))


def balanced_accuracy(samples: Sequence[RankedSample], threshold: float) -> float:
    """Mean of true-positive and true-negative rates at score > threshold."""
    pos = [s for s in samples if s.label == 1]
    neg = [s for s in samples if s.label != 1]
    if not pos or not neg:
        raise MetricUndefinedError("balanced accuracy needs both classes present")
    tpr = sum(1 for s in pos if s.score > threshold) / len(pos)
    tnr = sum(1 for s in neg if not s.score > threshold) / len(neg)
    return (tpr + tnr) / 2.0


def best_balanced_accuracy(samples: Sequence[RankedSample]) -> tuple[float, float]:
    """Grid-search observed scores for the threshold maximizing balanced accuracy.

    A harness calibration policy, meant to be run on a designated calibration
    split. Returns (best accuracy, threshold). Candidate thresholds are
    midpoints between consecutive distinct scores plus sentinels around the
    observed range.
    """
    scores = sorted({s.score for s in samples})
    if not scores:
        raise MetricUndefinedError("no samples")
    candidates = [scores[0] - 1.0]
    candidates += [(a + b) / 2.0 for a, b in zip(scores, scores[1:])]
    candidates += [scores[-1] + 1.0]
    best = max(candidates, key=lambda t: (balanced_accuracy(samples, t), -t))
    return balanced_accuracy(samples, best), best
