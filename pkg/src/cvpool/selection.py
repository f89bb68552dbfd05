"""Feature-subset enumeration, the fold x subset loss table, and the two
selection recipes.

Both recipes read the same table, so within one iteration any difference in
what they pick (and hence in downstream test loss) is attributable to the
selection rule alone. All tie-breaking is deterministic: subsets are
enumerated by (size, lexicographic indices) and ties fall to the earliest
candidate in that order; fold ties fall to the lowest fold index.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, FoldAssignment, HoldoutSplit, apply_standardizer, fit_standardizer
from .errors import DataError, TrainingError
from .svm import SvmModel, TrainConfig, predict, train_svm, zero_one_loss

# a feature subset is a strictly increasing tuple of column indices


def enumerate_subsets(d: int, max_size: int) -> list:
    """All subsets of sizes 1..max_size in (size, lexicographic) order."""
    if d < 1:
        raise DataError(f"d must be >= 1, got {d}")
    if not 1 <= max_size <= d:
        raise DataError(f"max_size must be in [1, {d}], got {max_size}")
    out = []
    for size in range(1, max_size + 1):
        out.extend(itertools.combinations(range(d), size))
    return out


def validate_subset(subset, d: int) -> tuple:
    subset = tuple(int(j) for j in subset)
    if not subset:
        raise DataError("feature subset is empty")
    if any(b <= a for a, b in zip(subset, subset[1:])):
        raise DataError(f"subset indices must be strictly increasing: {subset}")
    if subset[0] < 0 or subset[-1] >= d:
        raise DataError(f"subset {subset} out of range for d={d}")
    return subset


@dataclass(frozen=True)
class LossTable:
    """Validation zero-one losses for every (fold, subset) cell.

    ``losses[k][s]`` is the loss on fold k of the model trained on the other
    folds with features restricted to subset s. Degenerate cells (the
    training partition lost a class) carry loss 1.0 and are flagged rather
    than aborting the run.
    """

    losses: np.ndarray  # K x S
    val_counts: np.ndarray  # K
    subsets: tuple
    convergence_flags: np.ndarray  # K x S, True = solver converged
    degenerate_flags: np.ndarray  # K x S, True = single-class training cell

    @property
    def K(self) -> int:
        return self.losses.shape[0]

    @property
    def S(self) -> int:
        return self.losses.shape[1]


@dataclass(frozen=True)
class CellResult:
    """One trained (fold, subset) cell: the model plus its scaler and loss."""

    model: SvmModel
    standardizer: object  # Standardizer or None
    val_loss: float
    degenerate: bool = False


@dataclass(frozen=True)
class SelectionOutcome:
    """What one recipe picked, the machine it yields, and its test loss."""

    recipe: str  # "classic" | "pooled"
    subset: tuple
    fold: int
    selection_loss: float
    model: SvmModel
    standardizer: object
    test_loss: float = float("nan")


def _fold_train_indices(dev_indices, fold) -> list:
    fold_set = set(fold)
    return [i for i in dev_indices if i not in fold_set]


def train_cell(
    dataset: Dataset,
    train_indices,
    val_indices,
    subset,
    train_cfg: TrainConfig,
    standardize: bool,
) -> CellResult:
    """Train one cell and score it on its validation rows.

    This is the single code path used both when building the loss table and
    when finalizing a selected model, so repeating it with the same inputs
    reproduces the same floats exactly.
    """
    subset = validate_subset(subset, dataset.n_features)
    rows = np.asarray(train_indices, dtype=np.int64)
    X = np.ascontiguousarray(dataset.features[rows][:, subset])
    y = dataset.labels[rows]
    standardizer = None
    if standardize:
        standardizer = fit_standardizer(X, range(X.shape[0]))
        X = apply_standardizer(standardizer, X)
    try:
        model = train_svm(X, y, train_cfg)
    except TrainingError:
        return CellResult(model=None, standardizer=standardizer, val_loss=1.0, degenerate=True)
    val_rows = np.asarray(val_indices, dtype=np.int64)
    Xv = np.ascontiguousarray(dataset.features[val_rows][:, subset])
    if standardizer is not None:
        Xv = apply_standardizer(standardizer, Xv)
    loss = zero_one_loss(predict(model, Xv), dataset.labels[val_rows])
    return CellResult(model=model, standardizer=standardizer, val_loss=loss)


def build_loss_table(
    dataset: Dataset,
    dev_split: HoldoutSplit,
    folds: FoldAssignment,
    subsets,
    train_cfg: TrainConfig = TrainConfig(),
    standardize: bool = True,
) -> LossTable:
    """Train and validate every (fold, subset) cell."""
    subsets = tuple(validate_subset(s, dataset.n_features) for s in subsets)
    if not subsets:
        raise DataError("no subsets to evaluate")
    K = folds.K
    S = len(subsets)
    losses = np.zeros((K, S))
    converged = np.zeros((K, S), dtype=bool)
    degenerate = np.zeros((K, S), dtype=bool)
    val_counts = np.array([len(f) for f in folds.folds], dtype=np.int64)
    for k, fold in enumerate(folds.folds):
        train_idx = _fold_train_indices(dev_split.dev_indices, fold)
        for s, subset in enumerate(subsets):
            cell = train_cell(dataset, train_idx, fold, subset, train_cfg, standardize)
            losses[k, s] = cell.val_loss
            degenerate[k, s] = cell.degenerate
            converged[k, s] = cell.model.converged if cell.model is not None else False
    return LossTable(
        losses=losses,
        val_counts=val_counts,
        subsets=subsets,
        convergence_flags=converged,
        degenerate_flags=degenerate,
    )


def pool_losses(table: LossTable) -> np.ndarray:
    """One loss per subset: total validation errors over total validation
    samples (the count-weighted average of the per-fold losses)."""
    weights = table.val_counts.astype(np.float64)
    return (weights @ table.losses) / weights.sum()


def _best_subset_position(values, subsets) -> int:
    """Position minimizing (value, subset size, subset indices) -- invariant
    under any reordering of the table's subset axis."""
    return min(range(len(subsets)), key=lambda s: (values[s], len(subsets[s]), subsets[s]))


def select_classic(table: LossTable) -> tuple:
    """Fold-first selection: the fold with the best achievable loss, then the
    best subset within that fold. Returns (fold, subset_position)."""
    per_fold_best = table.losses.min(axis=1)
    k_star = int(np.argmin(per_fold_best))  # argmin takes the lowest index on ties
    s_star = _best_subset_position(table.losses[k_star], table.subsets)
    return k_star, s_star


def select_pooled(table: LossTable) -> tuple:
    """Subset-first selection: the subset with the smallest pooled loss, then
    the best fold for that subset. Returns (subset_position, fold)."""
    pooled = pool_losses(table)
    s_star = _best_subset_position(pooled, table.subsets)
    k_star = int(np.argmin(table.losses[:, s_star]))
    return s_star, k_star


def finalize_model(
    dataset: Dataset,
    dev_split: HoldoutSplit,
    folds: FoldAssignment,
    fold: int,
    subset,
    train_cfg: TrainConfig = TrainConfig(),
    standardize: bool = True,
) -> CellResult:
    """Retrain the selected (fold, subset) cell; identical to the table's cell."""
    if not 0 <= fold < folds.K:
        raise DataError(f"fold {fold} out of range for K={folds.K}")
    train_idx = _fold_train_indices(dev_split.dev_indices, folds.folds[fold])
    cell = train_cell(dataset, train_idx, folds.folds[fold], subset, train_cfg, standardize)
    if cell.degenerate:
        raise TrainingError(
            f"selected cell (fold {fold}, subset {tuple(subset)}) has a "
            "single-class training partition"
        )
    return cell
