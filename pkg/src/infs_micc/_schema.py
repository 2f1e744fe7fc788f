"""Shipped JSON schemas and atomic JSON writes."""

from __future__ import annotations

import json
import os
import tempfile
from functools import lru_cache
from importlib import resources

import jsonschema

from .exceptions import DataIOError, SchemaViolation


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("infs_micc").joinpath("schemas", f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)


def validate(doc, name: str) -> None:
    try:
        jsonschema.validate(doc, load_schema(name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaViolation(f"{name}: {where}: {exc.message}") from None


def dumps(doc) -> str:
    """Canonical, byte-stable JSON text."""
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json_atomic(path, doc) -> None:
    """Write to a temp file beside ``path`` and rename it into place."""
    write_text_atomic(path, dumps(doc))


def write_text_atomic(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise DataIOError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path}: invalid JSON: {exc}") from exc
    except OSError as exc:
        raise DataIOError(str(exc)) from exc
