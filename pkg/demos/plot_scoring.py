"""
Scoring one batch with MICC-UD
==============================

Build a synthetic batch where only two columns drive the label, score it,
and look at what the ranking is made of.
"""

import warnings

from infs_micc import make_planted, preprocess, score_dataset, select_batch_subset

# 1000 rows, two informative columns hidden among eight uniform noise columns
raw, informative = make_planted(n_rows=1000, seed=0)
data = preprocess(raw)
print("informative:", informative)

# relevance is mutual information with the label in bits; the denominator
# measures how unevenly a column is correlated with the rest
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    ranked = score_dataset(data)

for entry, rank in zip(ranked, ranked.normalized_rank):
    print(f"{entry.name:>15}  MI={entry.relevance:.3f}  denom={entry.denominator:.3g}  "
          f"score={entry.micc_ud:.3g}  rank={rank:.2f}")

# keep the top half of the list as this batch's subset
subset = select_batch_subset(ranked, rho=0.5)
print("batch subset:", subset.names)
