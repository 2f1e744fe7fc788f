"""Run configuration: defaults, JSON config files and validation."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields

from . import _schema
from .data_model import DEFAULT_MISSING_MARKERS
from .estimators import AVG_CORR_DIVISORS
from .exceptions import ValidationError
from .learners import ClassifierSpec
from .rfe import SELECTORS
from .scoring import RANK_SEMANTICS

CONFIG_ENV = "INFS_MICC_CONFIG"


@dataclass
class RunConfig:
    bins: int = 10
    alpha: float = 0.8
    rho: float = 0.5
    rank_semantics: str = "order"
    avg_corr_divisor: str = "d"
    cv_folds: int = 5
    seed: int = 42
    tolerance: float = 0.001
    satisfactory_f1: float = 0.95
    selector: str = "accuracy"
    beta: float = 0.5
    top_k: int = 10
    max_size: int | None = None
    classifiers: list = field(default_factory=lambda: ["decision_tree", "random_forest"])
    missing_markers: list = field(default_factory=lambda: sorted(DEFAULT_MISSING_MARKERS))
    label_column: str | int = -1
    positive_label: str | None = None
    threads: int | None = None

    def validate(self) -> "RunConfig":
        _schema.validate(self.to_json(), "config")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError("alpha must lie in (0, 1)")
        if not 0.0 < self.rho <= 1.0:
            raise ValidationError("rho must lie in (0, 1]")
        if self.rank_semantics not in RANK_SEMANTICS:
            raise ValidationError(f"rank_semantics must be one of {RANK_SEMANTICS}")
        if self.avg_corr_divisor not in AVG_CORR_DIVISORS:
            raise ValidationError(f"avg_corr_divisor must be one of {AVG_CORR_DIVISORS}")
        if self.selector not in SELECTORS:
            raise ValidationError(f"selector must be one of {SELECTORS}")
        self.classifier_specs()
        return self

    def classifier_specs(self) -> list[ClassifierSpec]:
        if not self.classifiers:
            raise ValidationError("at least one classifier is required")
        return [ClassifierSpec.parse(c, seed=self.seed) for c in self.classifiers]

    @property
    def n_jobs(self) -> int:
        return self.threads or os.cpu_count() or 1

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> "RunConfig":
        _schema.validate(doc, "config")
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in doc.items() if k in known}).validate()

    def updated(self, **overrides) -> "RunConfig":
        doc = self.to_json()
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig.from_json(doc)


def load_config(path=None) -> RunConfig:
    """Defaults, overlaid by ``path`` or else the file named in ``INFS_MICC_CONFIG``."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return RunConfig().validate()
    doc = _schema.read_json(path)
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    return RunConfig().updated(**doc)
