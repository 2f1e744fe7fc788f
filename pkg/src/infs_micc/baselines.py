"""Reference filter rankers and the comparison harness.

MIFS and mRMR are greedy: each step picks the candidate maximizing its
class relevance minus a redundancy penalty against already-selected
features (``beta`` times the sum for MIFS, the mean for mRMR). ANOVA-F and
Gini rank features independently by a per-feature statistic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .estimators import DEFAULT_BINS, discretize, mutual_information
from .exceptions import ValidationError
from .learners import ClassifierSpec, evaluate_cv
from .scoring import MethodScore, RankedList, rank_features, score_dataset

METHODS = ("infs-micc", "mifs", "mrmr", "anova", "gini")
DEFAULT_BETA = 0.5


class _MICache:
    """Lazily computed pairwise MI between binned features."""

    def __init__(self, data, bins):
        self.codes = [discretize(data.values[:, j], bins) for j in range(data.n_cols)]
        self.labels = np.asarray(data.labels)
        self._pair: dict[tuple[int, int], float] = {}

    def relevance(self) -> np.ndarray:
        return np.array([mutual_information(c, self.labels) for c in self.codes])

    def pair(self, i: int, j: int) -> float:
        key = (i, j) if i < j else (j, i)
        if key not in self._pair:
            self._pair[key] = mutual_information(self.codes[key[0]], self.codes[key[1]])
        return self._pair[key]


def _greedy(data, bins, penalty, method) -> RankedList:
    cache = _MICache(data, bins)
    rel = cache.relevance()
    remaining = list(range(data.n_cols))
    selected: list[int] = []
    entries = []
    while remaining:
        best, best_val = None, -np.inf
        for j in remaining:
            redundancy = [cache.pair(j, s) for s in selected]
            val = rel[j] - penalty(redundancy)
            if val > best_val:
                best, best_val = j, val
        remaining.remove(best)
        selected.append(best)
        entries.append(MethodScore(data.names[best], int(data.source_index[best]), float(best_val)))
    return RankedList(tuple(entries), method=method)


def mifs_rank(data, bins: int = DEFAULT_BINS, beta: float = DEFAULT_BETA) -> RankedList:
    """Greedy ``I(f;C) - beta * sum_{s in S} I(f;s)`` selection order."""
    return _greedy(data, bins, lambda red: beta * float(np.sum(red)) if red else 0.0, "mifs")


def mrmr_rank(data, bins: int = DEFAULT_BINS) -> RankedList:
    """Greedy ``I(f;C) - mean_{s in S} I(f;s)`` selection order."""
    return _greedy(data, bins, lambda red: float(np.mean(red)) if red else 0.0, "mrmr")


def anova_f(x, labels) -> float:
    """One-way ANOVA F statistic of ``x`` grouped by ``labels``."""
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels)
    groups = [x[labels == c] for c in np.unique(labels)]
    n, k = x.size, len(groups)
    if k < 2 or n <= k:
        return 0.0
    grand = x.mean()
    between = sum(g.size * (g.mean() - grand) ** 2 for g in groups) / (k - 1)
    within = sum(float(((g - g.mean()) ** 2).sum()) for g in groups) / (n - k)
    if within == 0.0:
        return float("inf") if between > 0.0 else 0.0
    return float(between / within)


def gini_gain(x, labels) -> float:
    """Largest Gini impurity decrease from a single threshold split on ``x``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    n = x.size
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    onehot = np.eye(int(y.max()) + 1)[ys]
    left = np.cumsum(onehot, axis=0)[:-1]
    total = onehot.sum(axis=0)
    right = total - left
    n_left = np.arange(1, n)
    n_right = n - n_left
    valid = xs[1:] > xs[:-1]
    if not valid.any():
        return 0.0
    parent = 1.0 - float(((total / n) ** 2).sum())
    gl = 1.0 - ((left / n_left[:, None]) ** 2).sum(axis=1)
    gr = 1.0 - ((right / n_right[:, None]) ** 2).sum(axis=1)
    child = (n_left * gl + n_right * gr) / n
    return float(parent - child[valid].min())


def _per_feature(data, stat, method) -> RankedList:
    entries = [
        MethodScore(data.names[j], int(data.source_index[j]), stat(data.values[:, j], data.labels))
        for j in range(data.n_cols)
    ]
    return rank_features(entries, method=method)


def anova_f_rank(data) -> RankedList:
    return _per_feature(data, anova_f, "anova")


def gini_rank(data) -> RankedList:
    return _per_feature(data, gini_gain, "gini")


def rank_by(method: str, data, bins: int = DEFAULT_BINS, beta: float = DEFAULT_BETA, avg_corr_divisor: str = "d") -> RankedList:
    if method == "infs-micc":
        return score_dataset(data, bins, avg_corr_divisor)
    if method == "mifs":
        return mifs_rank(data, bins, beta)
    if method == "mrmr":
        return mrmr_rank(data, bins)
    if method == "anova":
        return anova_f_rank(data)
    if method == "gini":
        return gini_rank(data)
    raise ValidationError(f"unknown method {method!r}; choose from {METHODS}")


@dataclass(frozen=True)
class MethodReport:
    method: str
    ranked: tuple
    subset_size: int
    f1: float
    accuracy: float

    @property
    def subset(self) -> tuple:
        return self.ranked[: self.subset_size]

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "ranked": list(self.ranked),
            "subset": list(self.subset),
            "subset_size": self.subset_size,
            "f1": self.f1,
            "accuracy": self.accuracy,
        }


def compare(
    data,
    methods: Sequence[str],
    subset_size: int,
    spec: ClassifierSpec,
    k: int = 5,
    seed: int = 42,
    bins: int = DEFAULT_BINS,
    beta: float = DEFAULT_BETA,
    avg_corr_divisor: str = "d",
) -> list[MethodReport]:
    """Cross-validated F1 of each method's top ``subset_size`` features.

    INFS-MICC is always part of the comparison and is reported first.
    """
    if subset_size < 1:
        raise ValidationError("subset_size must be at least 1")
    if subset_size > data.n_cols:
        raise ValidationError(f"subset_size {subset_size} exceeds {data.n_cols} features")
    methods = list(dict.fromkeys(["infs-micc", *methods]))
    reports = []
    for method in methods:
        ranked = rank_by(method, data, bins, beta, avg_corr_divisor)
        subset = ranked.names[:subset_size]
        metrics = evaluate_cv(data, subset, spec, k, seed)
        reports.append(MethodReport(method, tuple(ranked.names), subset_size, metrics.f1, metrics.accuracy))
    return reports
