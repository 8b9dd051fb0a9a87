"""Classification metrics, stratified cross-validation and random search."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import InsufficientData, LengthMismatch
from .mlp import (
    DROPOUT_RANGE,
    EPOCH_LATTICE,
    HIDDEN_LAYERS_RANGE,
    HIDDEN_UNITS_RANGE,
    LEARNING_RATE_RANGE,
    N_SVD_RANGE,
    MlpModel,
    TrainConfig,
    predict,
    train,
)
from .table import FeatureTable, fit_scaler, apply_scaler

METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "specificity")


def classification_metrics(pred, truth) -> dict[str, float]:
    """Confusion-matrix metrics in percent; 0 when a denominator is 0."""
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.size != truth.size:
        raise LengthMismatch(f"{pred.size} predictions vs {truth.size} labels")
    tp = int(np.sum((pred == 1) & (truth == 1)))
    tn = int(np.sum((pred == 0) & (truth == 0)))
    fp = int(np.sum((pred == 1) & (truth == 0)))
    fn = int(np.sum((pred == 0) & (truth == 1)))

    def ratio(num, den):
        return 100.0 * num / den if den > 0 else 0.0

    precision = ratio(tp, tp + fp)
    recall = ratio(tp, tp + fn)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return {
        "accuracy": ratio(tp + tn, tp + tn + fp + fn),
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "specificity": ratio(tn, tn + fp),
    }


@dataclass
class FoldResult:
    seed: int
    fold: int
    metrics: dict[str, float]
    test_ids: list[str] = field(default_factory=list)


@dataclass
class EvalReport:
    """Mean +/- std (percent) over folds x seeds, plus the raw fold values."""

    mean: dict[str, float]
    std: dict[str, float]
    folds: list[FoldResult]

    def text_table(self, title: str = "") -> str:
        lines = []
        if title:
            lines.append(title)
        width = max(len(m) for m in METRIC_NAMES) + 5
        for m in METRIC_NAMES:
            label = f"{m.capitalize()} (%)"
            lines.append(f"{label:<{width}} {self.mean[m]:6.2f} ± {self.std[m]:5.2f}")
        return "\n".join(lines)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["metric", "mean", "std"])
            for m in METRIC_NAMES:
                writer.writerow([m, f"{self.mean[m]:.6f}", f"{self.std[m]:.6f}"])
            writer.writerow([])
            writer.writerow(["seed", "fold"] + list(METRIC_NAMES))
            for fr in self.folds:
                writer.writerow(
                    [fr.seed, fr.fold] + [f"{fr.metrics[m]:.6f}" for m in METRIC_NAMES]
                )

    @staticmethod
    def aggregate(folds: list[FoldResult]) -> "EvalReport":
        mean, std = {}, {}
        for m in METRIC_NAMES:
            vals = np.array([fr.metrics[m] for fr in folds])
            mean[m] = float(vals.mean())
            std[m] = float(vals.std())
        return EvalReport(mean=mean, std=std, folds=folds)


def stratified_folds(y: np.ndarray, n_folds: int, seed: int) -> np.ndarray:
    """Fold index per subject; each class is shuffled per seed and dealt
    round-robin so folds stay class-balanced."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    assignment = np.full(y.size, -1, dtype=np.int64)
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        if idx.size < n_folds:
            raise InsufficientData(
                f"class {cls} has {idx.size} subjects, need >= {n_folds}"
            )
        idx = rng.permutation(idx)
        assignment[idx] = np.arange(idx.size) % n_folds
    return assignment


def _train_eval_fold(table, train_rows, test_rows, cfg, model_seed) -> dict[str, float]:
    train_tab = table.subset(train_rows)
    test_tab = table.subset(test_rows)
    scaler = fit_scaler(train_tab)
    train_scaled = apply_scaler(scaler, train_tab)
    test_scaled = apply_scaler(scaler, test_tab)
    rng = np.random.default_rng(model_seed)
    model = MlpModel.init(
        train_scaled.x.shape[1], cfg.hidden_layers, cfg.hidden_units, cfg.dropout, rng
    )
    fitted, _ = train(model, train_scaled, replace(cfg, seed=model_seed))
    _, labels = predict(fitted, test_scaled)
    return classification_metrics(labels, test_scaled.y)


def cross_validate(
    table: FeatureTable, cfg: TrainConfig, folds: int = 5, seeds: int = 3
) -> EvalReport:
    """Stratified k-fold CV repeated over `seeds` random seeds.

    The fold partition, model initialization and dropout stream all derive
    from cfg.seed, so the report is bitwise reproducible. Standardization is
    fitted on each training fold only.
    """
    results = []
    for s in range(seeds):
        seed = cfg.seed + s
        assignment = stratified_folds(table.y, folds, seed)
        for k in range(folds):
            test_rows = np.flatnonzero(assignment == k)
            train_rows = np.flatnonzero(assignment != k)
            model_seed = seed * 10000 + k
            metrics = _train_eval_fold(table, train_rows, test_rows, cfg, model_seed)
            results.append(
                FoldResult(
                    seed=seed,
                    fold=k,
                    metrics=metrics,
                    test_ids=[table.subject_ids[i] for i in test_rows],
                )
            )
    return EvalReport.aggregate(results)


# ---------------------------------------------------------------------------
# Hyperparameter search (seeded random search over the documented space)
# ---------------------------------------------------------------------------

@dataclass
class Trial:
    index: int
    config: TrainConfig
    mean_f1: float


def sample_config(rng: np.random.Generator, base: TrainConfig) -> TrainConfig:
    """Draw one configuration from the search space.

    Learning rate is log-uniform; hidden units are log-uniform integers;
    epochs come from the 25-step lattice.
    """
    lr = float(np.exp(rng.uniform(*np.log(LEARNING_RATE_RANGE))))
    units = int(round(np.exp(rng.uniform(*np.log(HIDDEN_UNITS_RANGE)))))
    units = int(np.clip(units, *HIDDEN_UNITS_RANGE))
    return replace(
        base,
        learning_rate=lr,
        epochs=int(rng.choice(EPOCH_LATTICE)),
        hidden_layers=int(rng.integers(HIDDEN_LAYERS_RANGE[0], HIDDEN_LAYERS_RANGE[1] + 1)),
        hidden_units=units,
        dropout=float(rng.uniform(*DROPOUT_RANGE)),
        n_svd=int(rng.integers(N_SVD_RANGE[0], N_SVD_RANGE[1] + 1)),
    )


def hyperparameter_search(
    table: FeatureTable,
    budget: int = 50,
    base: TrainConfig | None = None,
    inner_folds: int = 3,
    inner_seeds: int = 1,
    search_seed: int = 0,
) -> tuple[TrainConfig, list[Trial]]:
    """Seeded random search scored by mean inner-CV F1.

    Ties resolve to the lowest trial index. n_svd takes effect by dropping
    higher singular-value columns before the inner CV.
    """
    if budget < 1:
        raise ValueError("search budget must be >= 1")
    base = base or TrainConfig()
    rng = np.random.default_rng(search_seed)
    trials: list[Trial] = []
    best: Trial | None = None
    for i in range(budget):
        cfg = sample_config(rng, base)
        inner_table = table.select_feature_set(cfg.feature_set, cfg.n_svd)
        report = cross_validate(inner_table, cfg, folds=inner_folds, seeds=inner_seeds)
        trial = Trial(index=i, config=cfg, mean_f1=report.mean["f1"])
        trials.append(trial)
        if best is None or trial.mean_f1 > best.mean_f1:
            best = trial
    return best.config, trials


def write_trial_log(trials: list[Trial], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["trial", "learning_rate", "epochs", "hidden_layers", "hidden_units",
             "dropout", "n_svd", "feature_set", "weight_decay", "mean_f1"]
        )
        for t in trials:
            c = t.config
            writer.writerow(
                [t.index, f"{c.learning_rate:.8g}", c.epochs, c.hidden_layers,
                 c.hidden_units, f"{c.dropout:.6f}", c.n_svd, c.feature_set,
                 f"{c.weight_decay:.6g}", f"{t.mean_f1:.6f}"]
            )
