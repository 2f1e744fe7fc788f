"""
Merging batches as they arrive
==============================

Three batches are scored one at a time. Only each batch's ranked subset is
kept, and the subsets are folded into one feature set without revisiting
old rows.
"""

import tempfile
import warnings
from pathlib import Path

from infs_micc import (
    ClassifierSpec,
    fold_in,
    load_state,
    make_planted,
    make_state,
    preprocess,
    satisfaction_check,
    save_state,
    score_dataset,
    select_batch_subset,
)

workdir = Path(tempfile.mkdtemp())
states = []
for ordinal, seed in enumerate([10, 11, 12]):
    # each seed draws fresh rows; shuffle_columns=False keeps names aligned
    raw, informative = make_planted(n_rows=600, seed=seed, shuffle_columns=False)
    data = preprocess(raw)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        subset = select_batch_subset(score_dataset(data), rho=0.5)
    state = make_state(f"batch{ordinal}", ordinal, subset, data)
    path = workdir / f"batch{ordinal}.state.json"
    save_state(state, path)
    states.append(load_state(path))
    print(f"batch{ordinal} subset:", subset.names)

result = fold_in(states, alpha=0.8)
print("merged feature set:", list(result.f_d))
print("provenance:", result.provenance)

# is the merged set good enough on the newest batch alone?
report = satisfaction_check(result, data, ClassifierSpec("decision_tree"), threshold=0.95)
print(f"F1 on newest batch: {report['f1']:.3f} -> {report['recommendation']}")
