"""Statistical kernels: binning, mutual information and Pearson correlation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import ValidationError

DEFAULT_BINS = 10
AVG_CORR_DIVISORS = ("d", "d-1")


@dataclass(frozen=True, eq=False)
class JointHistogram:
    counts: np.ndarray
    total: int

    @property
    def row_bins(self) -> int:
        return self.counts.shape[0]

    @property
    def col_bins(self) -> int:
        return self.counts.shape[1]

    @classmethod
    def from_sequences(cls, x, y) -> "JointHistogram":
        x = _as_codes(x)
        y = _as_codes(y)
        if x.shape != y.shape:
            raise ValidationError(f"length mismatch: {x.size} vs {y.size}")
        if x.size == 0:
            raise ValidationError("mutual information of empty input")
        nx = int(x.max()) + 1
        ny = int(y.max()) + 1
        counts = np.bincount(x * ny + y, minlength=nx * ny).reshape(nx, ny)
        return cls(counts=counts, total=int(x.size))


def _as_codes(x) -> np.ndarray:
    a = np.asarray(x)
    if a.ndim != 1:
        raise ValidationError("expected a 1-D sequence")
    if a.size and not np.issubdtype(a.dtype, np.integer):
        if not np.all(a == np.round(a)):
            raise ValidationError("discrete sequences must hold integer codes")
        a = a.astype(np.int64)
    if a.size and a.min() < 0:
        # remap arbitrary integer symbols onto 0..k-1
        _, a = np.unique(a, return_inverse=True)
    return a.astype(np.int64, copy=False)


def discretize(column, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Equal-width codes on ``[0, 1]``: ``floor(x * bins)`` with the top edge clamped."""
    if bins < 2:
        raise ValidationError(f"bins must be >= 2, got {bins}")
    x = np.asarray(column, dtype=np.float64)
    codes = np.floor(x * bins).astype(np.int64)
    return np.clip(codes, 0, bins - 1)


def entropy(x) -> float:
    """Empirical Shannon entropy in bits."""
    counts = np.bincount(_as_codes(x))
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum())


def mutual_information(x, y, base: float = 2.0) -> float:
    """Empirical mutual information between two discrete sequences.

    Sums ``p(m,n) * log(p(m,n) / (p(m) p(n)))`` over occupied cells of the
    joint histogram. Result is in bits for the default ``base``.
    """
    h = JointHistogram.from_sequences(x, y)
    return _mi_from_counts(h.counts, h.total, base)


def _mi_from_counts(counts: np.ndarray, total: int, base: float = 2.0) -> float:
    pm = counts.sum(axis=1) / total
    pn = counts.sum(axis=0) / total
    rows, cols = np.nonzero(counts)
    pmn = counts[rows, cols] / total
    mi = float(np.sum(pmn * np.log(pmn / (pm[rows] * pn[cols])))) / np.log(base)
    if mi < 0.0:
        if mi < -1e-12:
            raise ArithmeticError(f"negative mutual information {mi}")
        mi = 0.0
    return mi


def pearson(x, y) -> float:
    """Pearson's r with sample means; 0.0 when either input is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValidationError(f"length mismatch: {x.size} vs {y.size}")
    if x.ndim != 1 or x.size < 2:
        raise ValidationError("pearson needs at least two paired samples")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Absolute pairwise Pearson coefficients with unit diagonal."""

    values: np.ndarray
    feature_names: tuple[str, ...]

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_matrix(cls, X, feature_names: Sequence[str] | None = None) -> "CorrelationMatrix":
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 2:
            raise ValidationError("correlation needs a 2-D matrix with >= 2 rows")
        d = X.shape[1]
        if feature_names is None:
            feature_names = [f"f{j}" for j in range(d)]
        centered = X - X.mean(axis=0)
        norms = np.sqrt(np.einsum("ij,ij->j", centered, centered))
        cross = centered.T @ centered
        with np.errstate(divide="ignore", invalid="ignore"):
            r = cross / np.outer(norms, norms)
        r[~np.isfinite(r)] = 0.0
        r = np.clip(np.abs(r), 0.0, 1.0)
        r = np.triu(r, 1)
        r = r + r.T
        np.fill_diagonal(r, 1.0)
        r.flags.writeable = False
        return cls(values=r, feature_names=tuple(feature_names))

    @classmethod
    def from_dataset(cls, data) -> "CorrelationMatrix":
        return cls.from_matrix(data.values, data.names)


def avg_abs_corr(matrix: CorrelationMatrix, i: int, divisor: str = "d") -> float:
    """Mean absolute correlation of feature ``i`` with every other feature.

    The off-diagonal sum has ``d - 1`` terms; ``divisor="d"`` divides by the
    full dimension ``d`` and ``divisor="d-1"`` gives the plain mean.
    """
    return float(avg_abs_corr_vector(matrix, divisor)[i])


def avg_abs_corr_vector(matrix: CorrelationMatrix, divisor: str = "d") -> np.ndarray:
    if divisor not in AVG_CORR_DIVISORS:
        raise ValidationError(f"avg_corr_divisor must be one of {AVG_CORR_DIVISORS}")
    d = matrix.d
    n = d if divisor == "d" else d - 1
    if n <= 0:
        return np.zeros(d)
    off = np.array(matrix.values, copy=True)
    np.fill_diagonal(off, 0.0)
    return off.sum(axis=1) / n
