"""Reference child process for the ``external`` classifier kind.

Run as ``python -m infs_micc.external_worker [--max-depth N]``. It answers
``fit`` / ``predict`` requests on stdin with a built-in decision tree, one
JSON object per line, and is mostly useful as a template for wrapping other
engines.
"""

import argparse
import json
import sys

import numpy as np

from .learners import DecisionTreeModel


def serve(stdin=sys.stdin, stdout=sys.stdout, max_depth=None):
    model = None
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
            cmd = req.get("cmd")
            if cmd == "fit":
                X = np.asarray(req["matrix"], dtype=np.float64)
                y = np.asarray(req["labels"], dtype=np.int64)
                model = DecisionTreeModel(max_depth=max_depth).fit(X, y)
                reply = {"status": "ok"}
            elif cmd == "predict":
                if model is None:
                    reply = {"status": "error", "message": "predict before fit"}
                else:
                    X = np.asarray(req["matrix"], dtype=np.float64)
                    reply = {"status": "ok", "predictions": model.predict(X).tolist()}
            else:
                reply = {"status": "error", "message": f"unknown cmd {cmd!r}"}
        except (KeyError, ValueError, TypeError) as exc:
            reply = {"status": "error", "message": str(exc)}
        stdout.write(json.dumps(reply) + "\n")
        stdout.flush()


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--max-depth", type=int, default=None)
    args = parser.parse_args(argv)
    serve(max_depth=args.max_depth)


if __name__ == "__main__":
    main()
