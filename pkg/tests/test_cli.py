import csv
import json

import numpy as np
import pytest

from infs_micc import _schema
from infs_micc.cli import main
from infs_micc.config import CONFIG_ENV, RunConfig, load_config
from infs_micc.exceptions import ValidationError
from infs_micc.synthetic import make_planted

from conftest import write_csv


@pytest.fixture
def planted_csv(tmp_path):
    raw, inf = make_planted(300, seed=1)
    labels = ["ATTACK" if v else "BENIGN" for v in raw.labels]
    path = tmp_path / "batch.csv"
    write_csv(path, raw.names, raw.values.tolist(), labels, "Label")
    return path, inf


def run(*argv):
    return main([str(a) for a in argv])


def report(path):
    doc = json.loads(path.read_text())
    _schema.validate(doc, "report")
    return doc


class TestCommands:
    def test_score(self, planted_csv, tmp_path):
        csv_path, inf = planted_csv
        out = tmp_path / "out"
        assert run("score", csv_path, "--batch-id", "b1", "--out-dir", out) == 0
        state = json.loads((out / "b1.state.json").read_text())
        _schema.validate(state, "batch_state")
        assert len(state["ranked"]) == 5  # ceil(0.5 * 10)
        rows = list(csv.DictReader((out / "b1.top.csv").open()))
        assert len(rows) == 10 and [int(r["rank"]) for r in rows] == list(range(1, 11))
        assert {r["name"] for r in rows[:2]} == set(inf)
        doc = report(out / "b1.score.json")
        _schema.validate(doc["results"]["top"], "ranked_report")

    def test_top_k(self, planted_csv, tmp_path):
        csv_path, _ = planted_csv
        assert run("score", csv_path, "--top-k", "3", "--out-dir", tmp_path) == 0
        assert len(report(tmp_path / "batch.score.json")["results"]["top"]) == 3

    def test_preprocess(self, planted_csv, tmp_path):
        csv_path, _ = planted_csv
        assert run("preprocess", csv_path, "--out-dir", tmp_path) == 0
        _schema.validate(json.loads((tmp_path / "batch.drop_log.json").read_text()), "drop_log")
        doc = report(tmp_path / "batch.preprocess.json")
        assert doc["results"]["n_rows"] == 300
        assert sorted(doc["results"]["label_names"]) == ["ATTACK", "BENIGN"]
        with (tmp_path / "batch.clean.csv").open() as f:
            rows = list(csv.reader(f))
        assert len(rows) == 301
        values = np.array([[float(v) for v in r[:-1]] for r in rows[1:]])
        assert values.min() >= 0.0 and values.max() <= 1.0

    def test_merge_self(self, planted_csv, tmp_path):
        csv_path, _ = planted_csv
        run("score", csv_path, "--batch-id", "b1", "--out-dir", tmp_path)
        state = tmp_path / "b1.state.json"
        assert run("merge", state, state, "--out-dir", tmp_path) == 0
        result = json.loads((tmp_path / "merge_result.json").read_text())
        _schema.validate(result, "merge_result")
        ranked = [e["name"] for e in json.loads(state.read_text())["ranked"]]
        assert sorted(result["f_d"]) == sorted(ranked)
        assert report(tmp_path / "merge.json")["results"]["satisfaction"] is None

    def test_merge_with_new_data(self, planted_csv, tmp_path):
        csv_path, _ = planted_csv
        run("score", csv_path, "--batch-id", "b1", "--out-dir", tmp_path)
        run("score", csv_path, "--batch-id", "b2", "--ordinal", "1", "--out-dir", tmp_path)
        code = run(
            "merge", tmp_path / "b1.state.json", tmp_path / "b2.state.json",
            "--new-data", csv_path, "--classifier", "decision_tree", "--out-dir", tmp_path,
        )
        assert code == 0
        sat = report(tmp_path / "merge.json")["results"]["satisfaction"]
        assert sat["recommendation"] in ("skip-old-rescan", "rerun-full-selection")

    def test_rfe_planted(self, planted_csv, tmp_path):
        csv_path, inf = planted_csv
        run("score", csv_path, "--batch-id", "b1", "--out-dir", tmp_path)
        code = run("rfe", csv_path, tmp_path / "b1.state.json", "--classifier", "decision_tree", "--out-dir", tmp_path)
        assert code == 0
        res = report(tmp_path / "rfe.json")["results"]
        assert res["winner"]["size"] == 2 and set(res["winner"]["features"]) == set(inf)
        for c in res["curves"]:
            _schema.validate(c["curve"], "rfe_curve")
        rows = list(csv.reader((tmp_path / "rfe_0_decision_tree_accuracy.csv").open()))
        assert rows[0] == ["size", "accuracy"] and len(rows) == 6

    def test_rfe_from_merge_result(self, planted_csv, tmp_path):
        csv_path, _ = planted_csv
        run("score", csv_path, "--batch-id", "b1", "--out-dir", tmp_path)
        state = tmp_path / "b1.state.json"
        run("merge", state, state, "--out-dir", tmp_path)
        for ranking in ("merge_result.json", "merge.json"):
            assert run("rfe", csv_path, tmp_path / ranking, "--classifier", "decision_tree",
                       "--max-size", "2", "--out-dir", tmp_path) == 0

    def test_compare(self, planted_csv, tmp_path):
        csv_path, _ = planted_csv
        code = run("compare", csv_path, "--size", "2", "--methods", "mifs", "anova",
                   "--classifier", "decision_tree", "--out-dir", tmp_path)
        assert code == 0
        rows = list(csv.reader((tmp_path / "compare.csv").open()))
        assert rows[0] == ["method", "f1", "subset_size"]
        assert [r[0] for r in rows[1:]] == ["infs-micc", "mifs", "anova"]
        _schema.validate(report(tmp_path / "compare.json")["results"]["methods"], "method_reports")


class TestExitCodes:
    def test_missing_file(self, tmp_path):
        assert run("score", tmp_path / "nope.csv", "--out-dir", tmp_path) == 2

    def test_bad_flag_value(self, planted_csv, tmp_path):
        assert run("score", planted_csv[0], "--alpha", "1.5", "--out-dir", tmp_path) == 1

    def test_unknown_command(self):
        assert run("explode") == 1

    def test_bad_label_column(self, planted_csv, tmp_path):
        assert run("score", planted_csv[0], "--label-col", "Nope", "--out-dir", tmp_path) == 1

    def test_config_mismatch(self, planted_csv, tmp_path):
        csv_path, _ = planted_csv
        run("score", csv_path, "--batch-id", "a", "--out-dir", tmp_path)
        run("score", csv_path, "--batch-id", "b", "--bins", "5", "--out-dir", tmp_path)
        assert run("merge", tmp_path / "a.state.json", tmp_path / "b.state.json", "--out-dir", tmp_path) == 1

    def test_tampered_state(self, planted_csv, tmp_path):
        run("score", planted_csv[0], "--batch-id", "a", "--out-dir", tmp_path)
        doc = json.loads((tmp_path / "a.state.json").read_text())
        del doc["ranked"]
        (tmp_path / "a.state.json").write_text(json.dumps(doc))
        assert run("merge", tmp_path / "a.state.json", tmp_path / "a.state.json", "--out-dir", tmp_path) == 1

    def test_broken_external(self, planted_csv, tmp_path):
        code = run("compare", planted_csv[0], "--size", "2", "--classifier",
                   "external:command=/nonexistent/worker", "--out-dir", tmp_path)
        assert code == 1


class TestConfig:
    def test_defaults(self):
        cfg = load_config()
        assert (cfg.bins, cfg.alpha, cfg.rho, cfg.cv_folds, cfg.seed) == (10, 0.8, 0.5, 5, 42)

    def test_precedence(self, planted_csv, tmp_path, monkeypatch):
        csv_path, _ = planted_csv
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"bins": 7, "rho": 0.3}))
        monkeypatch.setenv(CONFIG_ENV, str(cfg_file))
        assert run("score", csv_path, "--bins", "12", "--out-dir", tmp_path) == 0
        echoed = report(tmp_path / "batch.score.json")["metadata"]["config"]
        assert echoed["bins"] == 12 and echoed["rho"] == 0.3 and echoed["alpha"] == 0.8

    def test_explicit_file_beats_env(self, tmp_path, monkeypatch):
        (tmp_path / "env.json").write_text(json.dumps({"bins": 7}))
        (tmp_path / "flag.json").write_text(json.dumps({"bins": 9}))
        monkeypatch.setenv(CONFIG_ENV, str(tmp_path / "env.json"))
        assert load_config().bins == 7
        assert load_config(tmp_path / "flag.json").bins == 9

    def test_unknown_key(self, tmp_path):
        (tmp_path / "c.json").write_text(json.dumps({"binz": 7}))
        with pytest.raises(ValidationError):
            load_config(tmp_path / "c.json")

    def test_round_trip(self):
        cfg = RunConfig(bins=4, classifiers=["random_forest:n_trees=5"])
        assert RunConfig.from_json(json.loads(json.dumps(cfg.to_json()))) == cfg


@pytest.mark.parametrize("command", ["preprocess", "score", "merge", "rfe", "compare"])
def test_results_byte_identical(command, planted_csv, tmp_path):
    csv_path, _ = planted_csv
    setup = tmp_path / "setup"
    run("score", csv_path, "--batch-id", "s", "--out-dir", setup)
    state = setup / "s.state.json"
    argv = {
        "preprocess": ["preprocess", csv_path],
        "score": ["score", csv_path],
        "merge": ["merge", state, state, "--new-data", csv_path],
        "rfe": ["rfe", csv_path, state],
        "compare": ["compare", csv_path, "--size", "2"],
    }[command]
    flags = ["--classifier", "decision_tree", "--classifier", "random_forest:n_trees=5"]
    outputs = []
    for rep in ("one", "two"):
        assert run(*argv, *flags, "--out-dir", tmp_path / rep) == 0
        outputs.append({p.name: results_bytes(p) for p in (tmp_path / rep).iterdir()})
    assert outputs[0] and outputs[0] == outputs[1]


def results_bytes(path):
    """Whole file for CSV and bare JSON; just the results block for reports."""
    if path.suffix != ".json":
        return path.read_bytes()
    doc = json.loads(path.read_text())
    if isinstance(doc, dict) and "metadata" in doc:
        return _schema.dumps(doc["results"]).encode()
    return path.read_bytes()
