"""MLP disease classifier: feature tables, training, CV and search."""

from .evaluate import (
    METRIC_NAMES,
    EvalReport,
    FoldResult,
    Trial,
    classification_metrics,
    cross_validate,
    hyperparameter_search,
    sample_config,
    stratified_folds,
    write_trial_log,
)
from .mlp import (
    AdamWState,
    MlpModel,
    TrainConfig,
    bce_from_logits,
    compute_gradients,
    forward,
    predict,
    train,
)
from .table import (
    FeatureTable,
    ScalerParams,
    apply_scaler,
    fit_scaler,
    merge_tables,
    standardize,
)

__all__ = [
    "FeatureTable",
    "ScalerParams",
    "standardize",
    "fit_scaler",
    "apply_scaler",
    "merge_tables",
    "MlpModel",
    "TrainConfig",
    "AdamWState",
    "forward",
    "train",
    "predict",
    "compute_gradients",
    "bce_from_logits",
    "classification_metrics",
    "cross_validate",
    "stratified_folds",
    "hyperparameter_search",
    "sample_config",
    "write_trial_log",
    "EvalReport",
    "FoldResult",
    "Trial",
    "METRIC_NAMES",
]
