"""Classifiers, stratified cross-validation and accuracy / F1 metrics.

Two built-in learners are provided: a CART decision tree with the Gini
criterion and a bagged random forest that subsamples ``ceil(sqrt(d))``
features per split. Any other engine can be plugged in through the
``external`` kind, which speaks line-delimited JSON to a child process.
"""

from __future__ import annotations

import json
import math
import queue
import shlex
import subprocess
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.tree import DecisionTreeClassifier

from .exceptions import (
    EmptyFeatureSet,
    ExternalClassifierError,
    LabelError,
    ValidationError,
)

CLASSIFIER_KINDS = ("decision_tree", "random_forest", "external")

_ALLOWED = {
    "decision_tree": {"max_depth", "min_leaf", "seed"},
    "random_forest": {"max_depth", "min_leaf", "seed", "n_trees", "n_jobs"},
    "external": {"command", "timeout", "seed"},
}
_DEFAULTS = {
    "decision_tree": {"max_depth": None, "min_leaf": 1, "seed": 0},
    "random_forest": {"max_depth": None, "min_leaf": 1, "n_trees": 100, "n_jobs": 1},
    "external": {"timeout": 60.0},
}


@dataclass(frozen=True)
class ClassifierSpec:
    """Which learner to train and with what hyperparameters.

    ``random_forest`` requires an explicit ``seed``; unspecified
    hyperparameters take the per-kind defaults.
    """

    kind: str
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in CLASSIFIER_KINDS:
            raise ValidationError(f"unknown classifier kind {self.kind!r}")
        hp = dict(_DEFAULTS[self.kind])
        hp.update(self.hyperparameters)
        unknown = set(hp) - _ALLOWED[self.kind]
        if unknown:
            raise ValidationError(f"{self.kind}: unknown hyperparameters {sorted(unknown)}")
        if self.kind == "random_forest" and hp.get("seed") is None:
            raise ValidationError("random_forest requires a seed")
        if self.kind == "external" and not hp.get("command"):
            raise ValidationError("external classifier requires a command")
        for key in ("min_leaf", "n_trees", "n_jobs"):
            if key in hp and (not isinstance(hp[key], int) or hp[key] < 1):
                raise ValidationError(f"{key} must be a positive integer")
        if hp.get("max_depth") is not None and (not isinstance(hp["max_depth"], int) or hp["max_depth"] < 1):
            raise ValidationError("max_depth must be a positive integer or None")
        if "seed" in hp and hp["seed"] is not None and not isinstance(hp["seed"], int):
            raise ValidationError("seed must be an integer")
        object.__setattr__(self, "hyperparameters", hp)

    def __hash__(self):
        return hash((self.kind, json.dumps(self.hyperparameters, sort_keys=True, default=str)))

    @property
    def label(self) -> str:
        return self.kind

    def with_seed(self, seed: int) -> "ClassifierSpec":
        return ClassifierSpec(self.kind, {**self.hyperparameters, "seed": seed})

    def to_json(self) -> dict:
        return {"kind": self.kind, "hyperparameters": dict(self.hyperparameters)}

    @classmethod
    def parse(cls, text: str, seed: int | None = None) -> "ClassifierSpec":
        """Parse ``kind[:key=value,...]``, e.g. ``random_forest:n_trees=50``.

        For ``external`` the command goes last and may contain commas:
        ``external:timeout=30,command=python worker.py``.
        """
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        hp: dict = {}
        while rest:
            if rest.startswith("command="):
                hp["command"] = rest[len("command="):]
                break
            item, _, rest = rest.partition(",")
            key, eq, value = item.partition("=")
            if not eq:
                raise ValidationError(f"bad classifier option {item!r}")
            hp[key.strip()] = _parse_value(value.strip())
        if seed is not None and "seed" not in hp and kind != "external":
            hp["seed"] = seed
        return cls(kind, hp)


def _parse_value(value: str):
    if value.lower() in ("none", "null"):
        return None
    for conv in (int, float):
        try:
            return conv(value)
        except ValueError:
            pass
    return value


# -- models -----------------------------------------------------------------


def _check_training(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[1] == 0:
        raise EmptyFeatureSet("cannot train on an empty feature subset")
    if X.shape[0] != y.shape[0]:
        raise ValidationError("feature matrix and labels disagree in length")
    if len(np.unique(y)) < 2:
        raise LabelError("training labels contain a single class")
    return X, y


class DecisionTreeModel:
    def __init__(self, max_depth=None, min_leaf=1, seed=0, max_features=None):
        self.tree = DecisionTreeClassifier(
            criterion="gini",
            max_depth=max_depth,
            min_samples_leaf=min_leaf,
            max_features=max_features,
            random_state=seed,
        )

    def fit(self, X, y):
        self.tree.fit(X, y)
        return self

    def predict(self, X):
        return self.tree.predict(np.asarray(X, dtype=np.float64)).astype(np.int64)


class RandomForestModel:
    """Bagged CART trees; tree ``t`` draws from a stream seeded by ``(seed, t)``."""

    def __init__(self, n_trees=100, max_depth=None, min_leaf=1, seed=0, n_jobs=1):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed
        self.n_jobs = n_jobs
        self.trees: list[DecisionTreeClassifier] = []

    def _fit_one(self, t, X, y, max_features):
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, t]))
        idx = rng.integers(0, X.shape[0], X.shape[0])
        tree = DecisionTreeClassifier(
            criterion="gini",
            max_depth=self.max_depth,
            min_samples_leaf=self.min_leaf,
            max_features=max_features,
            random_state=int(rng.integers(0, 2**31 - 1)),
        )
        return tree.fit(X[idx], y[idx])

    def fit(self, X, y):
        max_features = math.ceil(math.sqrt(X.shape[1]))
        self.majority_ = int(np.bincount(y, minlength=2).argmax())
        if self.n_jobs > 1:
            with ThreadPoolExecutor(self.n_jobs) as pool:
                self.trees = list(pool.map(lambda t: self._fit_one(t, X, y, max_features), range(self.n_trees)))
        else:
            self.trees = [self._fit_one(t, X, y, max_features) for t in range(self.n_trees)]
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        votes = np.zeros(X.shape[0])
        for tree in self.trees:
            votes += tree.predict(X)
        frac = votes / len(self.trees)
        out = (frac > 0.5).astype(np.int64)
        out[frac == 0.5] = self.majority_
        return out


class ExternalModel:
    """Classifier living in a child process.

    Each request and response is one JSON object per line on the child's
    stdin / stdout: ``{"cmd": "fit", "matrix": [[...]], "labels": [...]}``
    and ``{"cmd": "predict", "matrix": [[...]]}``, answered by
    ``{"status": "ok", "predictions": [...]}``.
    """

    def __init__(self, command, timeout=60.0, seed=None):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = float(timeout)
        self.proc = None
        self._lines: queue.Queue = queue.Queue()

    def _start(self):
        try:
            self.proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ExternalClassifierError(f"cannot start {self.command}: {exc}") from exc
        threading.Thread(target=self._pump, args=(self.proc.stdout,), daemon=True).start()

    def _pump(self, stream):
        for line in stream:
            self._lines.put(line)
        self._lines.put(None)

    def _request(self, payload: dict) -> dict:
        if self.proc is None:
            self._start()
        try:
            self.proc.stdin.write(json.dumps(payload) + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ExternalClassifierError(f"external classifier died: {exc}") from exc
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            self.close()
            raise ExternalClassifierError(f"no response within {self.timeout}s") from None
        if line is None:
            raise ExternalClassifierError("external classifier closed its output")
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ExternalClassifierError(f"bad response line {line!r}") from exc
        if reply.get("status") != "ok":
            raise ExternalClassifierError(f"external classifier error: {reply}")
        return reply

    def fit(self, X, y):
        self._request({"cmd": "fit", "matrix": np.asarray(X).tolist(), "labels": np.asarray(y).tolist()})
        return self

    def predict(self, X):
        reply = self._request({"cmd": "predict", "matrix": np.asarray(X).tolist()})
        preds = np.asarray(reply.get("predictions", []), dtype=np.int64)
        if preds.shape != (len(X),):
            raise ExternalClassifierError("prediction count does not match rows")
        return preds

    def close(self):
        if self.proc is not None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
            self.proc = None

    def __del__(self):
        self.close()


def fit(spec: ClassifierSpec, X, y=None):
    """Train the learner described by ``spec``.

    ``X`` may be a dataset (its labels are used when ``y`` is omitted).
    """
    if y is None and hasattr(X, "labels"):
        X, y = X.values, X.labels
    X, y = _check_training(X, y)
    hp = spec.hyperparameters
    if spec.kind == "decision_tree":
        model = DecisionTreeModel(hp["max_depth"], hp["min_leaf"], hp["seed"])
    elif spec.kind == "random_forest":
        model = RandomForestModel(hp["n_trees"], hp["max_depth"], hp["min_leaf"], hp["seed"], hp["n_jobs"])
    else:
        model = ExternalModel(hp["command"], hp["timeout"])
    return model.fit(X, y)


def predict(model, X) -> np.ndarray:
    if hasattr(X, "values") and hasattr(X, "labels"):
        X = X.values
    return model.predict(X)


# -- metrics ----------------------------------------------------------------


def _paired(y_true, y_pred):
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValidationError(f"length mismatch: {y_true.size} vs {y_pred.size}")
    if y_true.size == 0:
        raise ValidationError("metrics need at least one sample")
    return y_true, y_pred


def accuracy(y_true, y_pred) -> float:
    y_true, y_pred = _paired(y_true, y_pred)
    return float(np.mean(y_true == y_pred))


def f1_score(y_true, y_pred, positive: int = 1) -> float:
    """F1 of the ``positive`` class; 0.0 when precision + recall is 0."""
    y_true, y_pred = _paired(y_true, y_pred)
    tp = int(np.sum((y_pred == positive) & (y_true == positive)))
    fp = int(np.sum((y_pred == positive) & (y_true != positive)))
    fn = int(np.sum((y_pred != positive) & (y_true == positive)))
    if tp == 0:
        return 0.0
    return 2.0 * tp / (2.0 * tp + fp + fn)


# -- cross-validation -------------------------------------------------------


def stratified_kfold(labels, k: int = 5, seed: int = 42) -> list[np.ndarray]:
    """Split row indices into ``k`` disjoint folds preserving class shares.

    Each class is shuffled and dealt round-robin, continuing from the fold
    where the previous class stopped so fold sizes stay balanced.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ValidationError("k must be at least 2")
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if members.size < k:
            raise ValidationError(f"class {cls} has {members.size} rows, fewer than k={k}")
        for i, row in enumerate(rng.permutation(members)):
            buckets[(offset + i) % k].append(int(row))
        offset = (offset + members.size) % k
    return [np.sort(np.array(b, dtype=np.int64)) for b in buckets]


@dataclass(frozen=True)
class FoldScaler:
    """Training-fold statistics: column means for imputation, min / max for scaling."""

    mean: np.ndarray
    low: np.ndarray
    high: np.ndarray

    def apply(self, X) -> np.ndarray:
        X = np.array(X, dtype=np.float64, copy=True)
        nan = np.isnan(X)
        if nan.any():
            X[nan] = np.broadcast_to(self.mean, X.shape)[nan]
        span = self.high - self.low
        span[span == 0] = 1.0
        return (X - self.low) / span


def fit_scaler(X) -> FoldScaler:
    X = np.asarray(X, dtype=np.float64)
    with np.errstate(all="ignore"):
        mean = np.nanmean(X, axis=0) if np.isnan(X).any() else X.mean(axis=0)
    mean = np.where(np.isnan(mean), 0.0, mean)
    filled = np.where(np.isnan(X), mean, X)
    return FoldScaler(mean=mean, low=filled.min(axis=0), high=filled.max(axis=0))


@dataclass(frozen=True)
class EvalMetrics:
    accuracy: float
    f1: float
    fold_accuracy: tuple
    fold_f1: tuple

    @property
    def k(self) -> int:
        return len(self.fold_accuracy)

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "f1": self.f1,
            "fold_accuracy": list(self.fold_accuracy),
            "fold_f1": list(self.fold_f1),
            "k": self.k,
        }

    @classmethod
    def from_folds(cls, accs: Sequence[float], f1s: Sequence[float]) -> "EvalMetrics":
        return cls(float(np.mean(accs)), float(np.mean(f1s)), tuple(accs), tuple(f1s))


def evaluate_cv(
    data,
    features: Sequence[str] | None,
    spec: ClassifierSpec,
    k: int = 5,
    seed: int = 42,
    positive: int = 1,
) -> EvalMetrics:
    """Stratified k-fold accuracy and F1 for ``features`` of ``data``.

    Imputation means and min / max scaling are refit on each training fold
    and only then applied to the held-out fold.
    """
    features = list(data.names if features is None else features)
    if not features:
        raise EmptyFeatureSet("evaluate_cv needs at least one feature")
    X = np.asarray(data.matrix(features), dtype=np.float64)
    y = np.asarray(data.labels, dtype=np.int64)
    folds = stratified_kfold(y, k, seed)
    accs, f1s = [], []
    for test in folds:
        train = np.ones(y.size, dtype=bool)
        train[test] = False
        scaler = fit_scaler(X[train])
        model = fit(spec, scaler.apply(X[train]), y[train])
        try:
            pred = model.predict(scaler.apply(X[test]))
        finally:
            if isinstance(model, ExternalModel):
                model.close()
        accs.append(accuracy(y[test], pred))
        f1s.append(f1_score(y[test], pred, positive))
    return EvalMetrics.from_folds(accs, f1s)
