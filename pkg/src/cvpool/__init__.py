"""K-fold cross-validation model selection with fold-first and pooled-loss recipes."""

from .dataset import (
    Dataset,
    FoldAssignment,
    HoldoutSplit,
    Standardizer,
    SynthConfig,
    apply_standardizer,
    fit_standardizer,
    load_csv,
    save_csv,
    stratified_holdout,
    stratified_kfold,
    synthesize_dataset,
)
from .errors import CvpoolError, DataError, TrainingError
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    FeatureScoreTable,
    IterationRecord,
    SummaryStats,
    UTestResult,
    compute_feature_scores,
    mann_whitney,
    mark_relevant,
    run_experiment,
    run_iteration,
    summarize,
)
from .rng import derive_rng
from .selection import (
    LossTable,
    SelectionOutcome,
    build_loss_table,
    enumerate_subsets,
    finalize_model,
    pool_losses,
    select_classic,
    select_pooled,
)
from .svm import SvmModel, TrainConfig, predict, train_svm, zero_one_loss

__all__ = [
    "CvpoolError",
    "DataError",
    "Dataset",
    "ExperimentConfig",
    "ExperimentReport",
    "FeatureScoreTable",
    "FoldAssignment",
    "HoldoutSplit",
    "IterationRecord",
    "LossTable",
    "SelectionOutcome",
    "Standardizer",
    "SummaryStats",
    "SvmModel",
    "SynthConfig",
    "TrainConfig",
    "TrainingError",
    "UTestResult",
    "apply_standardizer",
    "build_loss_table",
    "compute_feature_scores",
    "derive_rng",
    "enumerate_subsets",
    "finalize_model",
    "fit_standardizer",
    "load_csv",
    "mann_whitney",
    "mark_relevant",
    "pool_losses",
    "predict",
    "run_experiment",
    "run_iteration",
    "save_csv",
    "select_classic",
    "select_pooled",
    "stratified_holdout",
    "stratified_kfold",
    "summarize",
    "synthesize_dataset",
    "train_svm",
    "zero_one_loss",
]

__version__ = "0.1.0"
