"""Incremental feature selection from mutual information and correlation.

Typical use::

    from infs_micc import load_csv, preprocess, score_dataset, select_batch_subset

    data = preprocess(load_csv("flows.csv", label_column="Label"))
    ranked = score_dataset(data)
    subset = select_batch_subset(ranked, rho=0.5)
"""

__version__ = "0.1.0"

from .baselines import METHODS, anova_f_rank, compare, gini_rank, mifs_rank, mrmr_rank, rank_by
from .data_model import (
    Dataset,
    RawDataset,
    drop_zero_variance,
    from_arrays,
    impute_missing,
    load_csv,
    min_max_normalize,
    preprocess,
)
from .estimators import (
    CorrelationMatrix,
    JointHistogram,
    avg_abs_corr,
    discretize,
    mutual_information,
    pearson,
)
from .learners import ClassifierSpec, EvalMetrics, accuracy, evaluate_cv, f1_score, fit, predict, stratified_kfold
from .merge import (
    BatchState,
    MergeResult,
    fold_in,
    load_state,
    make_state,
    merge,
    satisfaction_check,
    save_state,
)
from .rfe import RfeCurve, optimal_subset, pick_winner, rfe_curve
from .scoring import (
    FeatureScore,
    RankedList,
    micc_ud_scores,
    rank_features,
    relevance_vector,
    score_dataset,
    select_batch_subset,
)
from .synthetic import make_duplicated, make_planted

__all__ = [
    "METHODS", "BatchState", "ClassifierSpec", "CorrelationMatrix", "Dataset", "EvalMetrics",
    "FeatureScore", "JointHistogram", "MergeResult", "RankedList", "RawDataset", "RfeCurve",
    "accuracy", "anova_f_rank", "avg_abs_corr", "compare", "discretize", "drop_zero_variance",
    "evaluate_cv", "f1_score", "fit", "fold_in", "from_arrays", "gini_rank", "impute_missing",
    "load_csv", "load_state", "make_duplicated", "make_planted", "make_state", "merge", "micc_ud_scores", "mifs_rank",
    "min_max_normalize", "mrmr_rank", "mutual_information", "optimal_subset", "pearson",
    "pick_winner", "predict", "preprocess", "rank_by", "rank_features", "relevance_vector",
    "rfe_curve", "satisfaction_check", "save_state",
    "score_dataset", "select_batch_subset", "stratified_kfold",
]
