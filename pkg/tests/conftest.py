import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from infs_micc.data_model import preprocess  # noqa: E402
from infs_micc.synthetic import make_planted  # noqa: E402


@pytest.fixture(scope="session")
def planted():
    raw, informative = make_planted(n_rows=1000, seed=0)
    return preprocess(raw), informative


def write_csv(path, names, rows, labels, label_name="label"):
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*names, label_name])
        for row, lab in zip(rows, labels):
            w.writerow([*row, lab])
    return path
