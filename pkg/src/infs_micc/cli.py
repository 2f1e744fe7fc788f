"""Command-line driver: ``infs-micc {preprocess,score,merge,rfe,compare}``.

Every command writes JSON reports with a ``metadata`` block (time, version,
config echo) and a ``results`` block that depends only on inputs, config
and seed. Exit status is 0 on success, 1 on validation errors and 2 on I/O
errors.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import logging
import os
import sys
import warnings
from pathlib import Path

from . import __version__, _schema
from .baselines import METHODS, compare
from .config import CONFIG_ENV, RunConfig, load_config
from .data_model import drop_log, load_csv, preprocess
from .exceptions import DataIOError, ExternalClassifierError, SchemaViolation, ValidationError
from .merge import (
    BatchState,
    MergeResult,
    load_state,
    make_state,
    merge,
    satisfaction_check,
    save_state,
)
from .rfe import optimal_subset, pick_winner, rfe_curve
from .scoring import score_dataset, select_batch_subset

log = logging.getLogger("infs_micc")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON config file (fallback: ${CONFIG_ENV})")
    common.add_argument("--label-col", dest="label_column")
    common.add_argument("--positive-label")
    common.add_argument("--bins", type=int)
    common.add_argument("--alpha", type=float)
    common.add_argument("--rho", type=float)
    common.add_argument("--folds", dest="cv_folds", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--tolerance", type=float)
    common.add_argument("--satisfactory-f1", type=float)
    common.add_argument("--selector", choices=["accuracy", "f1"])
    common.add_argument("--beta", type=float)
    common.add_argument("--top-k", type=int)
    common.add_argument("--max-size", type=int)
    common.add_argument(
        "--classifier", dest="classifiers", action="append",
        help="kind[:key=value,...]; repeatable (decision_tree, random_forest, external)",
    )
    common.add_argument("--rank-semantics", choices=["order", "score"])
    common.add_argument("--avg-corr-divisor", choices=["d", "d-1"])
    common.add_argument("--threads", type=int)
    common.add_argument("--out-dir", default=".")

    parser = _Parser(prog="infs-micc", description="Incremental MI/correlation feature selection.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("preprocess", parents=[common], help="clean a CSV and write a drop log")
    p.add_argument("csv")

    p = sub.add_parser("score", parents=[common], help="rank one batch and save its state")
    p.add_argument("csv")
    p.add_argument("--batch-id")
    p.add_argument("--ordinal", type=int, default=0, help="arrival order of this batch")

    p = sub.add_parser("merge", parents=[common], help="merge two saved batch states")
    p.add_argument("state_old")
    p.add_argument("state_new")
    p.add_argument("--new-data", help="CSV of the new batch for the satisfaction check")

    p = sub.add_parser("rfe", parents=[common], help="RFE curves over a ranked list")
    p.add_argument("csv")
    p.add_argument("ranking", help="batch state or merge result JSON")

    p = sub.add_parser("compare", parents=[common], help="compare against baseline rankers")
    p.add_argument("csv")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    return parser


_CONFIG_KEYS = (
    "label_column", "positive_label", "bins", "alpha", "rho", "cv_folds", "seed",
    "tolerance", "satisfactory_f1", "selector", "beta", "top_k", "max_size",
    "classifiers", "rank_semantics", "avg_corr_divisor", "threads",
)


def resolve_config(args) -> RunConfig:
    """Defaults < config file < command-line flags."""
    cfg = load_config(args.config)
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    return cfg.updated(**overrides)


def _envelope(command: str, cfg: RunConfig, results) -> dict:
    return {
        "metadata": {
            "tool": "infs-micc",
            "version": __version__,
            "command": command,
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "config": cfg.to_json(),
        },
        "results": results,
    }


def _write_report(out_dir: Path, name: str, command: str, cfg: RunConfig, results) -> Path:
    path = out_dir / name
    _schema.write_json_atomic(path, _envelope(command, cfg, results))
    return path


def _load(cfg: RunConfig, path):
    raw = load_csv(path, cfg.label_column, cfg.missing_markers, cfg.positive_label)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        data = preprocess(raw)
    for w in caught:
        log.warning("%s", w.message)
    return data


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_preprocess(args, cfg, out_dir: Path) -> dict:
    data = _load(cfg, args.csv)
    stem = Path(args.csv).stem
    labels = [data.label_names[c] for c in data.labels]
    rows = ([repr(float(v)) for v in row] + [lab] for row, lab in zip(data.values, labels))
    _schema.write_text_atomic(out_dir / f"{stem}.clean.csv", _csv_text([*data.names, "label"], rows))
    _schema.write_json_atomic(out_dir / f"{stem}.drop_log.json", drop_log(data))
    results = {
        "n_rows": data.n_rows,
        "n_features": data.n_cols,
        "features": list(data.names),
        "dropped": drop_log(data),
        "label_names": list(data.label_names),
        "stats": {n: {"min": s[0], "max": s[1], "mean": s[2]} for n, s in data.stats.items()},
    }
    _write_report(out_dir, f"{stem}.preprocess.json", "preprocess", cfg, results)
    return results


def cmd_score(args, cfg, out_dir: Path) -> dict:
    data = _load(cfg, args.csv)
    batch_id = args.batch_id or Path(args.csv).stem
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ranked = score_dataset(data, cfg.bins, cfg.avg_corr_divisor)
    for w in caught:
        log.warning("%s", w.message)
    subset = select_batch_subset(ranked, cfg.rho)
    state = make_state(
        batch_id, args.ordinal, subset, data,
        bins=cfg.bins, rho=cfg.rho, alpha=cfg.alpha,
        rank_semantics=cfg.rank_semantics, avg_corr_divisor=cfg.avg_corr_divisor,
    )
    save_state(state, out_dir / f"{batch_id}.state.json")
    top = ranked.prefix(min(cfg.top_k, len(ranked))).to_records()
    _schema.write_text_atomic(
        out_dir / f"{batch_id}.top.csv",
        _csv_text(
            ["rank", "name", "index", "relevance", "avg_corr", "micc_ud", "normalized_rank"],
            ([i + 1, r["name"], r["index"], repr(r["relevance"]), repr(r["avg_corr"]),
              repr(r["micc_ud"]), repr(r["normalized_rank"])] for i, r in enumerate(top)),
        ),
    )
    results = {
        "batch_id": batch_id,
        "arrival_ordinal": args.ordinal,
        "n_features": data.n_cols,
        "subset": subset.names,
        "top": top,
        "clamped": [e.name for e in ranked if e.clamped],
    }
    _write_report(out_dir, f"{batch_id}.score.json", "score", cfg, results)
    return results


def cmd_merge(args, cfg, out_dir: Path) -> dict:
    old = load_state(args.state_old)
    new = load_state(args.state_new)
    result = merge(old, new, cfg.alpha)
    _schema.write_json_atomic(out_dir / "merge_result.json", result.to_json())
    results = {"merge": result.to_json(), "satisfaction": None}
    if args.new_data:
        data = _load(cfg, args.new_data)
        spec = cfg.classifier_specs()[0]
        results["satisfaction"] = satisfaction_check(
            result, data, spec, cfg.cv_folds, cfg.seed, cfg.satisfactory_f1
        )
    _write_report(out_dir, "merge.json", "merge", cfg, results)
    return results


def _ranking_names(path) -> list[str]:
    doc = _schema.read_json(path)
    if isinstance(doc, dict) and "ranked" in doc:
        return BatchState.from_json(doc).ranked.names
    if isinstance(doc, dict) and "f_d" in doc:
        return list(MergeResult.from_json(doc).f_d)
    if isinstance(doc, dict) and isinstance(doc.get("results"), dict) and "merge" in doc["results"]:
        return list(MergeResult.from_json(doc["results"]["merge"]).f_d)
    raise SchemaViolation(f"{path}: neither a batch state nor a merge result")


def cmd_rfe(args, cfg, out_dir: Path) -> dict:
    data = _load(cfg, args.csv)
    names = _ranking_names(args.ranking)
    missing = [n for n in names if n not in data.names]
    if missing:
        raise ValidationError(f"ranked features absent from {args.csv}: {missing}")
    max_size = min(cfg.max_size or len(names), len(names))
    curves, optima = [], []
    for i, spec in enumerate(cfg.classifier_specs()):
        curve = rfe_curve(data, names, spec, cfg.cv_folds, cfg.seed, max_size, n_jobs=cfg.n_jobs)
        best = optimal_subset(curve, cfg.tolerance, cfg.selector)
        label = f"{i}_{spec.kind}"
        for metric in ("accuracy", "f1"):
            _schema.write_text_atomic(out_dir / f"rfe_{label}_{metric}.csv", curve.to_csv(metric))
        curves.append({"classifier": label, "spec": spec.to_json(), "curve": curve.to_json()})
        optima.append((label, best))
    win_label, win = pick_winner(optima, cfg.tolerance, cfg.selector)
    results = {
        "ranking": names,
        "curves": curves,
        "optima": [{"classifier": lab, **p.to_json()} for lab, p in optima],
        "winner": {"classifier": win_label, **win.to_json()},
    }
    _write_report(out_dir, "rfe.json", "rfe", cfg, results)
    return results


def cmd_compare(args, cfg, out_dir: Path) -> dict:
    data = _load(cfg, args.csv)
    spec = cfg.classifier_specs()[0]
    reports = compare(
        data, args.methods, args.size, spec, cfg.cv_folds, cfg.seed,
        cfg.bins, cfg.beta, cfg.avg_corr_divisor,
    )
    docs = [r.to_json() for r in reports]
    _schema.write_text_atomic(
        out_dir / "compare.csv",
        _csv_text(["method", "f1", "subset_size"], ([r.method, repr(r.f1), r.subset_size] for r in reports)),
    )
    results = {"classifier": spec.to_json(), "subset_size": args.size, "methods": docs}
    _write_report(out_dir, "compare.json", "compare", cfg, results)
    return results


COMMANDS = {
    "preprocess": cmd_preprocess,
    "score": cmd_score,
    "merge": cmd_merge,
    "rfe": cmd_rfe,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s: %(message)s", level=logging.INFO)
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        out_dir = Path(args.out_dir)
        os.makedirs(out_dir, exist_ok=True)
        COMMANDS[args.command](args, cfg, out_dir)
    except (ValidationError, ExternalClassifierError) as exc:
        log.error("%s", exc)
        return 1
    except (DataIOError, OSError) as exc:
        log.error("%s", exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
