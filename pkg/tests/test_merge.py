import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infs_micc import _schema
from infs_micc.data_model import from_arrays, preprocess
from infs_micc.exceptions import ConfigMismatch, SchemaViolation, ValidationError
from infs_micc.learners import ClassifierSpec
from infs_micc.merge import (
    BatchState,
    MergeResult,
    fold_in,
    load_state,
    make_state,
    merge,
    satisfaction_check,
    save_state,
)
from infs_micc.scoring import FeatureScore, RankedList, score_dataset, select_batch_subset


def state(names, ordinal=0, bins=10, semantics="order", batch_id=None):
    n = len(names)
    entries = tuple(FeatureScore(f, i, 0.1, 0.1, 0.1, float(n - i)) for i, f in enumerate(names))
    return make_state(batch_id or f"b{ordinal}", ordinal, RankedList(entries), bins=bins, rank_semantics=semantics)


class TestMerge:
    def test_common_only(self):
        r = merge(state(["b", "c", "a"]), state(["c", "b", "d"], 1), alpha=0.99)
        assert r.f_common == {"b", "c"}
        assert set(r.f_d) == {"b", "c"}
        assert r.f_old == {"b"} and r.f_new == {"c"}

    def test_alpha_admission(self):
        r = merge(state(["a", "b"]), state(["c", "d"], 1), alpha=0.8)
        assert r.f_common == frozenset()
        assert r.f_old == {"a"} and r.f_new == {"c"}
        assert r.f_d == ("a", "c")
        assert r.provenance == {"a": "old-high-rank", "c": "new-high-rank"}

    def test_self_merge_identity(self):
        s = state(["x", "y", "z"])
        for alpha in (0.1, 0.5, 0.9):
            assert set(merge(s, s, alpha).f_d) == {"x", "y", "z"}

    def test_ordering(self):
        old = state(["a", "b", "c", "e"])
        new = state(["c", "a", "e", "d"], 1)
        r = merge(old, new, alpha=0.9)
        # a: max(1, .75); c: max(.5, 1); e: max(.25, .5)
        assert r.f_d == ("a", "c", "e")
        assert all(r.provenance[f] == "common" for f in r.f_d)

    def test_boundary_rank_included(self):
        r = merge(state(["a", "b"]), state(["c"], 1), alpha=0.5)
        assert "b" in r.f_old

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
    def test_alpha_range(self, alpha):
        with pytest.raises(ValidationError):
            merge(state(["a"]), state(["a"], 1), alpha)

    def test_config_mismatch(self):
        with pytest.raises(ConfigMismatch):
            merge(state(["a"], bins=10), state(["a"], 1, bins=20), 0.5)
        with pytest.raises(ConfigMismatch):
            merge(state(["a"]), state(["a"], 1, semantics="score"), 0.5)

    def test_score_semantics(self):
        old = state(["a", "b", "c"], semantics="score")  # scores 3,2,1 -> 1, .5, 0
        new = state(["d", "e"], 1, semantics="score")
        r = merge(old, new, alpha=0.5)
        assert r.f_old == {"a", "b"} and r.f_new == {"d"}

    def test_new_feature_admission(self):
        """A feature seen only in the new batch enters iff its rank clears alpha."""
        old = state(["a", "b", "c", "d"])
        for pos in range(4):
            names = ["p", "q", "r"]
            names.insert(pos, "planted")
            new = state(names, 1)
            rank = (4 - pos) / 4
            r = merge(old, new, alpha=0.6)
            assert ("planted" in r.f_d) == (rank >= 0.6)


class TestFold:
    def test_single(self):
        s = state(["a", "b"])
        assert fold_in([s], 0.8).f_d == ("a", "b")

    def test_two_equals_merge(self):
        a, b = state(["a", "b", "c"]), state(["c", "d", "a"], 1)
        assert fold_in([a, b], 0.7) == merge(a, b, 0.7)

    def test_three_batches(self):
        s1 = state(["a", "b", "c", "e"], 0)
        s2 = state(["c", "a", "e", "d"], 1)
        s3 = state(["e", "c", "a", "f"], 2)
        r = fold_in([s1, s2, s3], 0.9)
        assert {"a", "c", "e"} <= set(r.f_d)
        # merged list after two batches is [a, c, e] with ranks 1, 2/3, 1/3
        assert r.f_d == ("a", "e", "c")

    def test_errors(self):
        with pytest.raises(ValidationError):
            fold_in([], 0.5)
        with pytest.raises(ValidationError):
            fold_in([state(["a"], 1), state(["a"], 1)], 0.5)


class TestPersistence:
    def test_round_trip(self, tmp_path, planted):
        data, _ = planted
        s = make_state("batch-1", 3, select_batch_subset(score_dataset(data), 0.5), data)
        save_state(s, tmp_path / "s.json")
        loaded = load_state(tmp_path / "s.json")
        assert loaded == s
        save_state(loaded, tmp_path / "t.json")
        assert (tmp_path / "s.json").read_bytes() == (tmp_path / "t.json").read_bytes()
        assert loaded.ranked.is_sorted()

    def test_bins_mismatch_after_reload(self, tmp_path):
        save_state(state(["a", "b"], bins=10), tmp_path / "a.json")
        save_state(state(["a", "b"], 1, bins=5), tmp_path / "b.json")
        with pytest.raises(ConfigMismatch):
            merge(load_state(tmp_path / "a.json"), load_state(tmp_path / "b.json"), 0.5)

    def test_missing_ranked(self, tmp_path):
        doc = state(["a"]).to_json()
        del doc["ranked"]
        (tmp_path / "x.json").write_text(json.dumps(doc))
        with pytest.raises(SchemaViolation):
            load_state(tmp_path / "x.json")

    def test_schema_version(self, tmp_path):
        doc = state(["a"]).to_json()
        doc["schema_version"] = 2
        (tmp_path / "x.json").write_text(json.dumps(doc))
        with pytest.raises(SchemaViolation):
            load_state(tmp_path / "x.json")

    def test_tampered_rank(self, tmp_path):
        doc = state(["a", "b"]).to_json()
        doc["ranked"][1]["normalized_rank"] = 0.9
        (tmp_path / "x.json").write_text(json.dumps(doc))
        with pytest.raises(SchemaViolation):
            load_state(tmp_path / "x.json")

    def test_merge_result_round_trip(self):
        r = merge(state(["a", "b"]), state(["c", "b"], 1), 0.6)
        doc = json.loads(json.dumps(r.to_json()))
        _schema.validate(doc, "merge_result")
        assert MergeResult.from_json(doc) == r


def test_satisfaction_check():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 2, 300)
    X = np.c_[y + rng.normal(0, 0.05, 300), rng.uniform(size=300)]
    data = preprocess(from_arrays(X, y, ["good", "noise"]))
    r = merge(state(["good", "gone"]), state(["good", "noise"], 1), 0.9)
    report = satisfaction_check(r, data, ClassifierSpec("decision_tree"), threshold=0.95)
    assert report["features_used"] == ["good"]
    assert report["satisfactory"] and report["recommendation"] == "skip-old-rescan"
    poor = satisfaction_check(r, data, ClassifierSpec("decision_tree"), threshold=1.01)
    assert poor["recommendation"] == "rerun-full-selection"


pool = [f"f{i}" for i in range(12)]
ranked_names = st.lists(st.sampled_from(pool), min_size=1, max_size=12, unique=True)


@settings(max_examples=200, deadline=None)
@given(ranked_names, ranked_names, st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_merge_algebra(old_names, new_names, a1, a2):
    a1, a2 = sorted((a1, a2))
    old, new = state(old_names), state(new_names, 1)
    r1, r2 = merge(old, new, a1), merge(old, new, a2)
    universe = set(old_names) | set(new_names)
    assert set(r1.f_d) <= universe
    assert set(r1.f_d) == r1.f_common | r1.f_old | r1.f_new
    assert r1.f_common == set(old_names) & set(new_names)
    assert set(r2.f_d) <= set(r1.f_d)
    assert set(merge(new, old, a1).f_d) == set(r1.f_d)
    assert set(merge(old, old, a1).f_d) == set(old_names)
