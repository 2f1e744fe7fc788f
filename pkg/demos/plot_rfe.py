"""
Choosing a subset size with RFE
===============================

Evaluate every prefix of the ranked list with cross-validation and keep the
smallest one that comes within the tolerance of the best score.
"""

import warnings

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from infs_micc import ClassifierSpec, make_planted, optimal_subset, pick_winner, preprocess, rfe_curve, score_dataset

raw, informative = make_planted(n_rows=1000, seed=1)
data = preprocess(raw)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    ranked = score_dataset(data)

specs = [
    ClassifierSpec("decision_tree"),
    ClassifierSpec("random_forest", {"seed": 42, "n_trees": 25}),
]
optima = []
for spec in specs:
    curve = rfe_curve(data, ranked, spec, k=5, seed=42)
    best = optimal_subset(curve, tolerance=0.001)
    optima.append((spec.kind, best))
    plt.plot([p.size for p in curve.points], curve.scores(), marker="o", label=spec.kind)
    print(f"{spec.kind}: best size {best.size}, accuracy {best.metrics.accuracy:.3f}")

label, winner = pick_winner(optima)
print("winner:", label, list(winner.features))

plt.xlabel("features kept")
plt.ylabel("5-fold accuracy")
plt.legend()
plt.savefig("rfe_curve.png", dpi=100)
