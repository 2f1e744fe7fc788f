"""Seeded synthetic datasets with a known informative subset."""

from __future__ import annotations

import numpy as np

from .data_model import RawDataset


def make_planted(
    n_rows: int = 1000,
    n_informative: int = 2,
    n_noise: int = 8,
    seed: int = 0,
    shuffle_columns: bool = True,
):
    """Uniform features where the label depends only on the informative ones.

    The label is 1 exactly when the informative features sum past half their
    count, so every informative feature carries class information on its own
    and together they determine the class. Noise columns are independent
    uniforms. Returns ``(dataset, informative_names)``.
    """
    rng = np.random.default_rng(seed)
    inf = rng.uniform(size=(n_rows, n_informative))
    noise = rng.uniform(size=(n_rows, n_noise))
    labels = (inf.sum(axis=1) > n_informative / 2).astype(np.int64)
    names = [f"informative_{i}" for i in range(n_informative)] + [f"noise_{i}" for i in range(n_noise)]
    values = np.hstack([inf, noise])
    if shuffle_columns:
        order = rng.permutation(values.shape[1])
        values = values[:, order]
        names = [names[j] for j in order]
    data = RawDataset(tuple(names), values, labels)
    return data, [n for n in names if n.startswith("informative_")]


def make_duplicated(n_rows: int = 500, n_copies: int = 8, seed: int = 0) -> RawDataset:
    """One noisy-informative feature repeated ``n_copies`` times."""
    rng = np.random.default_rng(seed)
    base = rng.uniform(size=n_rows)
    labels = (base + rng.normal(scale=0.1, size=n_rows) > 0.5).astype(np.int64)
    values = np.repeat(base[:, None], n_copies, axis=1)
    return RawDataset(tuple(f"copy_{i}" for i in range(n_copies)), values, labels)
