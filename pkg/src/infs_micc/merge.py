"""Incremental merge of per-batch ranked subsets.

Each data batch is scored on its own and reduced to a ranked subset. When a
new batch arrives its subset is combined with the stored subset of the
previous batch, without touching the old rows:

* ``f_common``: features present in both subsets;
* ``f_old`` / ``f_new``: features of either subset whose rank is at least
  ``alpha``;
* ``f_d``: the union of the three.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import _schema
from .exceptions import ConfigMismatch, SchemaViolation, ValidationError
from .scoring import RANK_SEMANTICS, RankedList

SCHEMA_VERSION = 1
DEFAULT_ALPHA = 0.8
DEFAULT_SATISFACTORY_F1 = 0.95

PROVENANCE = ("common", "old-high-rank", "new-high-rank")


@dataclass(frozen=True)
class BatchState:
    """Everything kept about a scored batch once its rows are discarded."""

    batch_id: str
    arrival_ordinal: int
    ranked: RankedList
    preprocessing_stats: dict = field(default_factory=dict)
    config_snapshot: dict = field(default_factory=dict)

    @property
    def rank_semantics(self) -> str:
        return self.config_snapshot.get("rank_semantics", "order")

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "batch_id": self.batch_id,
            "arrival_ordinal": self.arrival_ordinal,
            "config_snapshot": dict(self.config_snapshot),
            "ranked": self.ranked.to_records(),
            "preprocessing_stats": {
                name: {"min": lo, "max": hi, "mean": mean}
                for name, (lo, hi, mean) in self.preprocessing_stats.items()
            },
        }

    @classmethod
    def from_json(cls, doc) -> "BatchState":
        if isinstance(doc, dict) and doc.get("schema_version") not in (None, SCHEMA_VERSION):
            raise SchemaViolation(
                f"unsupported schema_version {doc.get('schema_version')!r}; expected {SCHEMA_VERSION}"
            )
        _schema.validate(doc, "batch_state")
        ranked = RankedList.from_json({"entries": doc["ranked"]})
        for rec, r in zip(doc["ranked"], ranked.normalized_rank):
            if abs(rec["normalized_rank"] - r) > 1e-12:
                raise SchemaViolation(f"normalized_rank of {rec['name']!r} inconsistent with its position")
        stats = {
            name: (s["min"], s["max"], s["mean"])
            for name, s in doc["preprocessing_stats"].items()
        }
        return cls(
            batch_id=doc["batch_id"],
            arrival_ordinal=doc["arrival_ordinal"],
            ranked=ranked,
            preprocessing_stats=stats,
            config_snapshot=dict(doc["config_snapshot"]),
        )


def make_state(
    batch_id: str,
    arrival_ordinal: int,
    ranked: RankedList,
    data=None,
    *,
    bins: int = 10,
    rho: float = 0.5,
    alpha: float = DEFAULT_ALPHA,
    rank_semantics: str = "order",
    avg_corr_divisor: str = "d",
) -> BatchState:
    stats = {}
    if data is not None:
        stats = {n: tuple(float(v) for v in data.stats[n]) for n in data.names if n in data.stats}
    return BatchState(
        batch_id=batch_id,
        arrival_ordinal=int(arrival_ordinal),
        ranked=ranked,
        preprocessing_stats=stats,
        config_snapshot={
            "bins": int(bins),
            "rho": float(rho),
            "alpha": float(alpha),
            "rank_semantics": rank_semantics,
            "avg_corr_divisor": avg_corr_divisor,
            "normalization": "per-batch",
        },
    )


def save_state(state: BatchState, path) -> None:
    _schema.write_json_atomic(path, state.to_json())


def load_state(path) -> BatchState:
    return BatchState.from_json(_schema.read_json(path))


@dataclass(frozen=True)
class MergeResult:
    f_common: frozenset
    f_old: frozenset
    f_new: frozenset
    f_d: tuple
    provenance: dict
    alpha: float = DEFAULT_ALPHA
    rank_semantics: str = "order"
    batches: tuple = ()

    def to_json(self) -> dict:
        return {
            "f_common": sorted(self.f_common),
            "f_old": sorted(self.f_old),
            "f_new": sorted(self.f_new),
            "f_d": list(self.f_d),
            "provenance": {name: self.provenance[name] for name in self.f_d},
            "alpha": self.alpha,
            "rank_semantics": self.rank_semantics,
            "batches": list(self.batches),
        }

    @classmethod
    def from_json(cls, doc) -> "MergeResult":
        _schema.validate(doc, "merge_result")
        return cls(
            f_common=frozenset(doc["f_common"]),
            f_old=frozenset(doc["f_old"]),
            f_new=frozenset(doc["f_new"]),
            f_d=tuple(doc["f_d"]),
            provenance=dict(doc["provenance"]),
            alpha=doc["alpha"],
            rank_semantics=doc["rank_semantics"],
            batches=tuple(doc.get("batches", ())),
        )


def check_compatible(old: BatchState, new: BatchState) -> None:
    for key in ("bins", "rank_semantics"):
        a, b = old.config_snapshot.get(key), new.config_snapshot.get(key)
        if a != b:
            raise ConfigMismatch(f"{key} differs between batches: {a!r} vs {b!r}")


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie strictly between 0 and 1, got {alpha}")


def merge(old: BatchState, new: BatchState, alpha: float = DEFAULT_ALPHA) -> MergeResult:
    """Combine two batches' ranked subsets.

    ``f_d`` lists common features first, by the better of their two ranks,
    then the batch-specific high-rank features by their own rank; remaining
    ties go by name.
    """
    _check_alpha(alpha)
    check_compatible(old, new)
    semantics = old.rank_semantics
    if semantics not in RANK_SEMANTICS:
        raise ValidationError(f"rank_semantics must be one of {RANK_SEMANTICS}")
    r_old = old.ranked.rank_values(semantics)
    r_new = new.ranked.rank_values(semantics)

    f_common = frozenset(r_old) & frozenset(r_new)
    f_old = frozenset(f for f, r in r_old.items() if r >= alpha)
    f_new = frozenset(f for f, r in r_new.items() if r >= alpha)

    common = sorted(f_common, key=lambda f: (-max(r_old[f], r_new[f]), f))
    rest = {f: r_old[f] for f in f_old - f_common}
    rest.update({f: r_new[f] for f in f_new - f_common})
    tail = sorted(rest, key=lambda f: (-rest[f], f))

    provenance = {f: "common" for f in common}
    provenance.update({f: ("old-high-rank" if f in r_old else "new-high-rank") for f in tail})
    return MergeResult(
        f_common=f_common,
        f_old=f_old,
        f_new=f_new,
        f_d=tuple(common + tail),
        provenance=provenance,
        alpha=alpha,
        rank_semantics=semantics,
        batches=(old.batch_id, new.batch_id),
    )


def merged_state(old: BatchState, new: BatchState, result: MergeResult) -> BatchState:
    """A pseudo batch whose ranked list is ``f_d`` in merge order.

    Each entry keeps the score record from the batch that ranked it higher,
    and normalized ranks are recomputed over the merged list.
    """
    sem = result.rank_semantics
    r_old = old.ranked.rank_values(sem)
    r_new = new.ranked.rank_values(sem)
    by_old = {e.name: e for e in old.ranked}
    by_new = {e.name: e for e in new.ranked}
    entries = []
    for f in result.f_d:
        if f in by_old and f in by_new:
            entries.append(by_new[f] if r_new[f] >= r_old[f] else by_old[f])
        else:
            entries.append(by_old.get(f) or by_new[f])
    return BatchState(
        batch_id=f"{old.batch_id}+{new.batch_id}",
        arrival_ordinal=new.arrival_ordinal,
        ranked=RankedList(tuple(entries), method="infs-micc-merged"),
        preprocessing_stats={**old.preprocessing_stats, **new.preprocessing_stats},
        config_snapshot=dict(new.config_snapshot),
    )


def fold_in(states: Sequence[BatchState], alpha: float = DEFAULT_ALPHA) -> MergeResult:
    """Left fold of :func:`merge` over batches in arrival order."""
    states = list(states)
    if not states:
        raise ValidationError("fold_in needs at least one batch state")
    _check_alpha(alpha)
    ordinals = [s.arrival_ordinal for s in states]
    if any(a >= b for a, b in zip(ordinals, ordinals[1:])):
        raise ValidationError(f"arrival ordinals must strictly increase, got {ordinals}")
    if len(states) == 1:
        only = states[0]
        names = tuple(only.ranked.names)
        return MergeResult(
            f_common=frozenset(names),
            f_old=frozenset(),
            f_new=frozenset(),
            f_d=names,
            provenance={f: "common" for f in names},
            alpha=alpha,
            rank_semantics=only.rank_semantics,
            batches=(only.batch_id,),
        )
    acc = states[0]
    result = None
    for state in states[1:]:
        result = merge(acc, state, alpha)
        acc = merged_state(acc, state, result)
    return result


def satisfaction_check(
    result: MergeResult,
    new_data,
    spec,
    k: int = 5,
    seed: int = 42,
    threshold: float = DEFAULT_SATISFACTORY_F1,
) -> dict:
    """Evaluate ``f_d`` on the new batch and say whether the old batch needs a rescan.

    Features of ``f_d`` absent from ``new_data`` are skipped and listed.
    """
    from .learners import evaluate_cv

    present = [f for f in result.f_d if f in new_data.names]
    missing = [f for f in result.f_d if f not in new_data.names]
    report = {"features_used": present, "missing_features": missing, "threshold": threshold}
    if not present:
        report.update(accuracy=None, f1=None, satisfactory=False, recommendation="rerun-full-selection")
        return report
    metrics = evaluate_cv(new_data, present, spec, k, seed)
    ok = metrics.f1 >= threshold
    report.update(
        accuracy=metrics.accuracy,
        f1=metrics.f1,
        satisfactory=ok,
        recommendation="skip-old-rescan" if ok else "rerun-full-selection",
    )
    return report
