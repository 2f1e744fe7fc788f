"""Recursive feature elimination driven by a ranked feature list.

Candidate subsets are the prefixes of the ranked list: eliminating features
lowest-ranked first visits the same subsets as growing the prefix, so the
curve is evaluated for sizes ``1..max_size`` and the smallest size whose
score comes within ``tolerance`` of the best one is reported.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .exceptions import ValidationError
from .learners import ClassifierSpec, EvalMetrics, evaluate_cv

DEFAULT_TOLERANCE = 0.001
SELECTORS = ("accuracy", "f1")


@dataclass(frozen=True)
class RfePoint:
    size: int
    features: tuple
    metrics: EvalMetrics

    def to_json(self) -> dict:
        return {"size": self.size, "features": list(self.features), **self.metrics.to_json()}


@dataclass(frozen=True)
class RfeCurve:
    points: tuple
    classifier: str = ""

    def __len__(self):
        return len(self.points)

    def scores(self, metric: str = "accuracy") -> list[float]:
        if metric not in SELECTORS:
            raise ValidationError(f"metric must be one of {SELECTORS}")
        return [getattr(p.metrics, metric) for p in self.points]

    def to_json(self) -> dict:
        return {"classifier": self.classifier, "points": [p.to_json() for p in self.points]}

    def to_csv(self, metric: str = "accuracy") -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["size", metric])
        for p, v in zip(self.points, self.scores(metric)):
            writer.writerow([p.size, repr(v)])
        return buf.getvalue()


def _names(ranked) -> list[str]:
    return list(ranked.names) if hasattr(ranked, "names") else [str(n) for n in ranked]


def rfe_curve(
    data,
    ranked,
    spec: ClassifierSpec,
    k: int = 5,
    seed: int = 42,
    max_size: int | None = None,
    n_jobs: int = 1,
) -> RfeCurve:
    """Cross-validated scores of every ranked-list prefix up to ``max_size``."""
    names = _names(ranked)
    if not names:
        raise ValidationError("ranked list is empty")
    max_size = len(names) if max_size is None else max_size
    if not 1 <= max_size <= len(names):
        raise ValidationError(f"max_size must lie in [1, {len(names)}]")

    def point(size):
        subset = tuple(names[:size])
        return RfePoint(size, subset, evaluate_cv(data, subset, spec, k, seed))

    sizes = range(1, max_size + 1)
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            points = list(pool.map(point, sizes))
    else:
        points = [point(s) for s in sizes]
    return RfeCurve(tuple(points), classifier=spec.label)


def optimal_subset(curve: RfeCurve, tolerance: float = DEFAULT_TOLERANCE, metric: str = "accuracy") -> RfePoint:
    """Smallest prefix scoring at least ``max - tolerance`` on ``metric``."""
    if not curve.points:
        raise ValidationError("empty curve")
    scores = curve.scores(metric)
    floor = max(scores) - tolerance
    for p, s in zip(curve.points, scores):
        if s >= floor:
            return p
    raise AssertionError("unreachable: the maximum always clears the floor")


def pick_winner(optima: Sequence[tuple[str, RfePoint]], tolerance: float = DEFAULT_TOLERANCE, metric: str = "accuracy"):
    """Among per-classifier optima within ``tolerance`` of the best, take the smallest subset.

    Ties on size go to the earlier classifier. Returns ``(label, point)``.
    """
    if not optima:
        raise ValidationError("no classifier optima to compare")
    best = max(getattr(p.metrics, metric) for _, p in optima)
    contenders = [(label, p) for label, p in optima if getattr(p.metrics, metric) >= best - tolerance]
    return min(contenders, key=lambda lp: lp[1].size)
