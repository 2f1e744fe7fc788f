"""MICC-UD feature scoring and ranked lists.

A feature's MICC-UD score is its mutual information with the class divided
by the largest gap between its average absolute correlation and any one of
its pairwise absolute correlations::

    micc_ud(f_i) = MI(f_i; C) / max_{j != i} (avg_corr(f_i) - |corr(f_i, f_j)|)

Features that carry class information and whose correlations with the rest
are uneven (a few strong links, many weak ones) score highest.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .estimators import (
    DEFAULT_BINS,
    CorrelationMatrix,
    avg_abs_corr_vector,
    discretize,
    mutual_information,
)
from .exceptions import SchemaViolation, ValidationError

DENOM_EPSILON = 1e-9
RANK_SEMANTICS = ("order", "score")
DEFAULT_RHO = 0.5


class DegenerateDenominatorWarning(UserWarning):
    """A MICC-UD denominator fell below ``DENOM_EPSILON`` and was clamped."""


@dataclass(frozen=True)
class FeatureScore:
    name: str
    index: int
    relevance: float
    avg_corr: float
    denominator: float
    micc_ud: float
    clamped: bool = False

    @property
    def score(self) -> float:
        return self.micc_ud

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "index": self.index,
            "relevance": self.relevance,
            "avg_corr": self.avg_corr,
            "denominator": self.denominator,
            "micc_ud": self.micc_ud,
            "clamped": self.clamped,
        }


@dataclass(frozen=True)
class MethodScore:
    """Ranked entry for methods other than MICC-UD; ``score`` is method specific."""

    name: str
    index: int
    score: float

    def to_record(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RankedList:
    """Features in rank order with their normalized rank statistic.

    The normalized rank of the feature at 1-based position ``p`` among ``n``
    entries is ``1 - (p - 1) / n``: the top feature has 1.0 and the last has
    ``1 / n``.
    """

    entries: tuple
    method: str = "infs-micc"

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise ValidationError("ranked list contains duplicate feature names")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    @property
    def normalized_rank(self) -> list[float]:
        n = len(self.entries)
        return [(n - p) / n for p in range(n)]

    def rank_values(self, semantics: str = "order") -> dict[str, float]:
        """Per-feature rank statistic in ``(0, 1]`` compared against alpha.

        ``"order"`` uses the normalized position; ``"score"`` min-max scales
        the scores over this list (a single entry, or all-equal scores, give 1.0).
        """
        if semantics == "order":
            return dict(zip(self.names, self.normalized_rank))
        if semantics == "score":
            scores = np.array([e.score for e in self.entries], dtype=np.float64)
            if scores.size == 0:
                return {}
            lo, hi = scores.min(), scores.max()
            if hi == lo:
                scaled = np.ones_like(scores)
            else:
                scaled = (scores - lo) / (hi - lo)
            return dict(zip(self.names, scaled.tolist()))
        raise ValidationError(f"rank_semantics must be one of {RANK_SEMANTICS}")

    def prefix(self, k: int) -> "RankedList":
        return RankedList(self.entries[:k], method=self.method)

    def is_sorted(self) -> bool:
        scores = [e.score for e in self.entries]
        return all(a >= b for a, b in zip(scores, scores[1:]))

    def to_records(self) -> list[dict]:
        """JSON-ready entries in rank order, each with its normalized rank."""
        return [
            {**e.to_record(), "normalized_rank": r}
            for e, r in zip(self.entries, self.normalized_rank)
        ]

    def to_json(self) -> dict:
        return {"method": self.method, "entries": self.to_records()}

    @classmethod
    def from_json(cls, doc) -> "RankedList":
        try:
            method = doc.get("method", "infs-micc")
            entries = []
            for rec in doc["entries"]:
                if "micc_ud" in rec:
                    entries.append(FeatureScore(
                        name=str(rec["name"]),
                        index=int(rec["index"]),
                        relevance=float(rec["relevance"]),
                        avg_corr=float(rec["avg_corr"]),
                        denominator=float(rec["denominator"]),
                        micc_ud=float(rec["micc_ud"]),
                        clamped=bool(rec.get("clamped", False)),
                    ))
                else:
                    entries.append(MethodScore(str(rec["name"]), int(rec["index"]), float(rec["score"])))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise SchemaViolation(f"malformed ranked list: {exc}") from exc
        return cls(tuple(entries), method=method)


def relevance_vector(data, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Mutual information (bits) between each binned feature and the labels."""
    labels = np.asarray(data.labels)
    return np.array(
        [mutual_information(discretize(data.values[:, j], bins), labels) for j in range(data.n_cols)],
        dtype=np.float64,
    )


def micc_ud_scores(
    relevance: Sequence[float],
    corr: CorrelationMatrix,
    avg_corr_divisor: str = "d",
    indices: Sequence[int] | None = None,
    denom_epsilon: float = DENOM_EPSILON,
) -> list[FeatureScore]:
    """Score every feature; denominators below ``denom_epsilon`` are clamped."""
    relevance = np.asarray(relevance, dtype=np.float64)
    d = corr.d
    if d < 2:
        raise ValidationError("MICC-UD needs at least two features")
    if relevance.shape != (d,):
        raise ValidationError(f"relevance has {relevance.size} entries for {d} features")
    if indices is None:
        indices = range(d)
    avg = avg_abs_corr_vector(corr, avg_corr_divisor)
    gaps = avg[:, None] - corr.values
    np.fill_diagonal(gaps, -np.inf)
    denom = gaps.max(axis=1)

    out, clamped = [], []
    for i in range(d):
        den = float(denom[i])
        hit = den < denom_epsilon
        if hit:
            den = denom_epsilon
            clamped.append(corr.feature_names[i])
        out.append(FeatureScore(
            name=corr.feature_names[i],
            index=int(indices[i]),
            relevance=float(relevance[i]),
            avg_corr=float(avg[i]),
            denominator=den,
            micc_ud=float(relevance[i]) / den,
            clamped=hit,
        ))
    if clamped:
        warnings.warn(
            f"MICC-UD denominator clamped to {denom_epsilon:g} for {clamped}",
            DegenerateDenominatorWarning,
            stacklevel=2,
        )
    return out


def rank_features(scores: Iterable, method: str = "infs-micc") -> RankedList:
    """Sort by score descending; equal scores keep ascending column index."""
    scores = list(scores)
    if not scores:
        raise ValidationError("cannot rank an empty feature set")
    ordered = sorted(scores, key=lambda s: (-s.score, s.index))
    return RankedList(tuple(ordered), method=method)


def score_dataset(data, bins: int = DEFAULT_BINS, avg_corr_divisor: str = "d") -> RankedList:
    """Relevance, correlation and MICC-UD ranking for one preprocessed batch."""
    rel = relevance_vector(data, bins)
    corr = CorrelationMatrix.from_dataset(data)
    return rank_features(micc_ud_scores(rel, corr, avg_corr_divisor, indices=data.source_index))


def select_batch_subset(ranked: RankedList, rho: float = DEFAULT_RHO) -> RankedList:
    """Keep the top ``ceil(rho * n)`` entries (at least one)."""
    if not 0.0 < rho <= 1.0:
        raise ValidationError(f"rho must lie in (0, 1], got {rho}")
    # the slack absorbs products such as 0.7 * 10 = 7.000000000000001
    k = max(1, math.ceil(rho * len(ranked) - 1e-9))
    return ranked.prefix(k)
