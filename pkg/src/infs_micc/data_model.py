"""Tabular flow data: CSV loading and the three cleaning steps.

The cleaning pipeline is mean imputation, removal of zero-variance columns
and min-max scaling to [0, 1]. Every step only ever removes columns; the
row count is preserved throughout.
"""

from __future__ import annotations

import csv
import os
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .exceptions import (
    DataIOError,
    DuplicateColumnName,
    EmptyDataset,
    EmptyFeatureSet,
    LabelColumnNotFound,
    LabelError,
    ValidationError,
)

DEFAULT_MISSING_MARKERS = frozenset({"", "NA", "NaN", "Infinity"})

#: Columns with population variance below this (on raw values) are dropped.
VARIANCE_EPSILON = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class RawDataset:
    """Named numeric columns plus binary labels; ``NaN`` marks a missing cell.

    ``values`` is stored row-major as ``(n_rows, n_cols)``; ``column`` returns
    a view of a single feature.
    """

    names: tuple[str, ...]
    values: np.ndarray
    labels: np.ndarray
    label_names: tuple[str, ...] = ("0", "1")
    source_index: tuple[int, ...] = ()
    dropped: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2:
            raise ValidationError("values must be a 2-D array")
        labels = np.array(self.labels, dtype=np.int64, copy=True)
        labels.flags.writeable = False
        names = tuple(str(n) for n in self.names)
        if len(names) != values.shape[1]:
            raise ValidationError(
                f"{len(names)} names for {values.shape[1]} columns"
            )
        if labels.shape != (values.shape[0],):
            raise ValidationError("labels must have exactly one entry per row")
        if any(not n for n in names):
            raise ValidationError("column names must be non-empty")
        if len(set(names)) != len(names):
            raise DuplicateColumnName(_first_duplicate(names))
        source_index = tuple(self.source_index) or tuple(range(len(names)))
        if len(source_index) != len(names):
            raise ValidationError("source_index length does not match names")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "source_index", source_index)
        object.__setattr__(self, "dropped", tuple(tuple(d) for d in self.dropped))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"unknown feature {name!r}") from None

    def column(self, name_or_index) -> np.ndarray:
        j = name_or_index if isinstance(name_or_index, (int, np.integer)) else self.index_of(name_or_index)
        return self.values[:, j]

    def matrix(self, features: Sequence[str] | None = None) -> np.ndarray:
        """Return the ``(n_rows, len(features))`` sub-matrix for ``features``."""
        if features is None:
            return self.values
        idx = [self.index_of(f) for f in features]
        return self.values[:, idx]

    def take_rows(self, rows: Sequence[int]) -> "RawDataset":
        """Raw copy restricted to ``rows``; preprocess it again before scoring."""
        rows = np.asarray(rows, dtype=np.int64)
        return RawDataset._replace(self, RawDataset, values=self.values[rows], labels=self.labels[rows])

    def _replace(self, cls=None, **changes):
        cls = cls or type(self)
        kwargs = {
            "names": self.names,
            "values": self.values,
            "labels": self.labels,
            "label_names": self.label_names,
            "source_index": self.source_index,
            "dropped": self.dropped,
        }
        kwargs.update(changes)
        return cls(**kwargs)

    def _keep(self, keep: Sequence[int], new_drops: Iterable[tuple[str, str]]):
        return self._replace(
            names=tuple(self.names[j] for j in keep),
            values=self.values[:, list(keep)],
            source_index=tuple(self.source_index[j] for j in keep),
            dropped=self.dropped + tuple(new_drops),
        )


@dataclass(frozen=True, eq=False)
class Dataset(RawDataset):
    """A cleaned dataset: no missing cells and every value in ``[0, 1]``.

    ``stats`` maps each retained feature to the raw ``(min, max, mean)`` used
    for scaling, so later rows can be transformed the same way.
    """

    stats: dict = field(default_factory=dict)
    degenerate_labels: bool = False

    def __post_init__(self):
        super().__post_init__()
        if np.isnan(self.values).any():
            raise ValidationError("Dataset may not contain missing values")
        if self.values.size and (self.values.min() < 0.0 or self.values.max() > 1.0):
            raise ValidationError("Dataset values must lie in [0, 1]")
        n_classes = len(np.unique(self.labels))
        if n_classes < 2 and not self.degenerate_labels:
            object.__setattr__(self, "degenerate_labels", True)
        object.__setattr__(self, "stats", dict(self.stats))

    def _replace(self, cls=None, **changes):
        changes.setdefault("stats", self.stats)
        changes.setdefault("degenerate_labels", self.degenerate_labels)
        return super()._replace(cls, **changes)

    def _keep(self, keep, new_drops):
        kept = super()._keep(keep, new_drops)
        stats = {n: self.stats[n] for n in kept.names if n in self.stats}
        return kept._replace(stats=stats)

    def select(self, features: Sequence[str]) -> "Dataset":
        """Restrict to ``features`` in the given order."""
        keep = [self.index_of(f) for f in features]
        return self._keep(keep, ())

    def transform(self, rows: np.ndarray) -> np.ndarray:
        """Scale raw rows (columns in ``self.names`` order) with the stored stats.

        Missing cells are filled with the stored column mean. Values outside
        the original range map outside ``[0, 1]``.
        """
        rows = np.array(rows, dtype=np.float64, copy=True)
        mins = np.array([self.stats[n][0] for n in self.names])
        maxs = np.array([self.stats[n][1] for n in self.names])
        means = np.array([self.stats[n][2] for n in self.names])
        nan = np.isnan(rows)
        if nan.any():
            rows[nan] = np.broadcast_to(means, rows.shape)[nan]
        return (rows - mins) / (maxs - mins)


def _first_duplicate(names):
    seen = set()
    for n in names:
        if n in seen:
            return f"duplicate column name {n!r}"
        seen.add(n)
    return "duplicate column name"


def encode_labels(raw_labels: Sequence[str], positive_label: str | None = None):
    """Map raw label strings to ``{0, 1}``.

    Without ``positive_label`` the first label seen becomes 0 and the second 1.
    Returns ``(codes, label_names)`` where ``label_names[code]`` is the raw value.
    """
    order = [str(v) for v in pd.unique(pd.Series(list(raw_labels), dtype=object))]
    if len(order) > 2:
        raise LabelError(f"more than two distinct labels: {order[:5]!r}")
    if positive_label is not None:
        if positive_label not in order:
            raise LabelError(f"positive label {positive_label!r} not present")
        negatives = [lab for lab in order if lab != positive_label]
        names = (negatives[0] if negatives else "", positive_label)
    else:
        names = tuple(order) + ("",) * (2 - len(order))
    lookup = {lab: code for code, lab in enumerate(names) if lab in order}
    codes = pd.Series(list(raw_labels), dtype=object).map(lookup).to_numpy(dtype=np.int64)
    return codes, names


def from_arrays(values, labels, names: Sequence[str] | None = None) -> RawDataset:
    """Wrap an in-memory matrix and integer labels as a :class:`RawDataset`."""
    values = np.asarray(values, dtype=np.float64)
    if names is None:
        names = [f"f{j}" for j in range(values.shape[1])]
    labels = np.asarray(labels)
    uniq = list(dict.fromkeys(labels.tolist()))
    if set(uniq) <= {0, 1}:
        codes = labels.astype(np.int64)
        label_names = ("0", "1")
    else:
        codes, label_names = encode_labels([str(v) for v in labels.tolist()])
    return RawDataset(tuple(names), values, codes, label_names=label_names)


def _resolve_label_column(header: list[str], label_column) -> int:
    if isinstance(label_column, (int, np.integer)):
        j = int(label_column)
        if -len(header) <= j < len(header):
            return j % len(header)
        raise LabelColumnNotFound(f"label column index {label_column} out of range")
    if label_column in header:
        return header.index(label_column)
    # a numeric string names an index only if no header matches it
    try:
        return _resolve_label_column(header, int(label_column))
    except (TypeError, ValueError):
        raise LabelColumnNotFound(f"label column {label_column!r} not in header") from None


def load_csv(
    path,
    label_column: str | int = -1,
    missing_markers: Iterable[str] = DEFAULT_MISSING_MARKERS,
    positive_label: str | None = None,
) -> RawDataset:
    """Read a headed CSV into a :class:`RawDataset`.

    Header names are whitespace-stripped (CICIDS exports pad them). Cells in
    ``missing_markers``, unparseable numerics and infinities become ``NaN``.
    """
    path = os.fspath(path)
    markers = {m.strip() for m in missing_markers}
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh), None)
    except FileNotFoundError as exc:
        raise DataIOError(f"no such file: {path}") from exc
    except OSError as exc:
        raise DataIOError(str(exc)) from exc
    if not header:
        raise EmptyDataset(f"{path}: missing header row")
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        raise DuplicateColumnName(_first_duplicate(header))
    label_j = _resolve_label_column(header, label_column)

    try:
        frame = pd.read_csv(
            path,
            header=None,
            skiprows=1,
            names=list(range(len(header))),
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame(columns=list(range(len(header))))
    except pd.errors.ParserError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    if len(frame) == 0:
        raise EmptyDataset(f"{path}: no data rows")

    raw_labels = frame[label_j].tolist()
    codes, label_names = encode_labels(raw_labels, positive_label)

    feature_js = [j for j in range(len(header)) if j != label_j]
    values = np.empty((len(frame), len(feature_js)), dtype=np.float64)
    for out_j, j in enumerate(feature_js):
        cells = frame[j].str.strip()
        numeric = pd.to_numeric(cells.mask(cells.isin(markers)), errors="coerce")
        col = numeric.to_numpy(dtype=np.float64, na_value=np.nan)
        col[~np.isfinite(col)] = np.nan
        values[:, out_j] = col
    return RawDataset(
        names=tuple(header[j] for j in feature_js),
        values=values,
        labels=codes,
        label_names=label_names,
        source_index=tuple(range(len(feature_js))),
    )


def impute_missing(d: RawDataset) -> RawDataset:
    """Replace each missing cell with its column's mean; drop all-missing columns."""
    values = np.array(d.values, copy=True)
    keep, drops = [], []
    for j, name in enumerate(d.names):
        col = values[:, j]
        missing = np.isnan(col)
        if missing.all():
            warnings.warn(f"column {name!r} has no values; dropped", stacklevel=2)
            drops.append((name, "all-missing"))
            continue
        if missing.any():
            col[missing] = col[~missing].mean()
        keep.append(j)
    out = d._replace(values=values)
    return out._keep(keep, drops)


def drop_zero_variance(d: RawDataset, epsilon: float = VARIANCE_EPSILON) -> RawDataset:
    """Remove columns whose population variance is below ``epsilon``."""
    if np.isnan(d.values).any():
        raise ValidationError("drop_zero_variance requires imputed data")
    if d.n_cols == 0:
        raise EmptyFeatureSet("no feature columns left to check")
    variances = d.values.var(axis=0) if d.n_rows else np.zeros(d.n_cols)
    keep = [j for j in range(d.n_cols) if variances[j] >= epsilon]
    drops = [(d.names[j], "zero-variance") for j in range(d.n_cols) if variances[j] < epsilon]
    if not keep:
        raise EmptyFeatureSet("every feature column has zero variance")
    return d._keep(keep, drops)


def min_max_normalize(d: RawDataset) -> Dataset:
    """Map each column to ``(x - min) / (max - min)``."""
    if np.isnan(d.values).any():
        raise ValidationError("min_max_normalize requires imputed data")
    if d.n_cols == 0:
        raise EmptyFeatureSet("no feature columns")
    mins = d.values.min(axis=0)
    maxs = d.values.max(axis=0)
    flat = maxs == mins
    if flat.any():
        bad = [d.names[j] for j in np.flatnonzero(flat)]
        raise ValidationError(f"constant columns cannot be min-max scaled: {bad}")
    means = d.values.mean(axis=0)
    scaled = np.clip((d.values - mins) / (maxs - mins), 0.0, 1.0)
    stats = {
        n: (float(mins[j]), float(maxs[j]), float(means[j]))
        for j, n in enumerate(d.names)
    }
    return d._replace(cls=Dataset, values=scaled, stats=stats)


def preprocess(d: RawDataset, epsilon: float = VARIANCE_EPSILON) -> Dataset:
    """Impute, drop zero-variance columns, then min-max scale."""
    return min_max_normalize(drop_zero_variance(impute_missing(d), epsilon))


def drop_log(d: RawDataset) -> list[dict]:
    """The drop log as JSON-ready ``[{name, reason}, ...]``."""
    return [{"name": n, "reason": r} for n, r in d.dropped]

