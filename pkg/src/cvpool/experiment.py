"""Repetition harness comparing the two selection recipes, plus the
statistics reported for the comparison (loss summaries, Mann-Whitney U,
feature scores over unique selected subsets).

Each iteration draws a fresh stratified holdout split and fold assignment,
builds one loss table, and lets both recipes select from it; the held-out
samples score the finalized models. Iterations are independent and
deterministic given (master seed, iteration index).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import (
    Dataset,
    FoldAssignment,
    HoldoutSplit,
    apply_standardizer,
    stratified_holdout,
    stratified_kfold,
)
from .errors import DataError
from .rng import check_seed, derive_rng
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
from .svm import TrainConfig, predict, zero_one_loss


@dataclass(frozen=True)
class ExperimentConfig:
    """Full experiment setup; the defaults encode the reference protocol
    (30 iterations, 5 folds, 30% holdout, subsets up to size 2, C=1)."""

    master_seed: int
    iterations: int = 30
    K: int = 5
    test_fraction: float = 0.3
    max_subset_size: int = 2
    train_cfg: TrainConfig = field(default_factory=TrainConfig)
    standardize: bool = True
    relevance_cutoff: float = 0.8
    alpha: float = 0.05

    def __post_init__(self):
        check_seed(self.master_seed)
        if self.iterations < 1:
            raise DataError(f"iterations must be >= 1, got {self.iterations}")
        if self.K < 2:
            raise DataError(f"K must be >= 2, got {self.K}")
        if not 0.0 < self.test_fraction < 1.0:
            raise DataError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.max_subset_size < 1:
            raise DataError(f"max_subset_size must be >= 1, got {self.max_subset_size}")
        if not 0.0 <= self.relevance_cutoff <= 1.0:
            raise DataError(f"relevance_cutoff must be in [0, 1], got {self.relevance_cutoff}")
        if not 0.0 < self.alpha < 1.0:
            raise DataError(f"alpha must be in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class IterationRecord:
    """One tandem iteration: shared split/folds and both recipes' outcomes."""

    index: int
    split: HoldoutSplit
    folds: FoldAssignment
    classic: SelectionOutcome
    pooled: SelectionOutcome
    unconverged_cells: int = 0
    degenerate_cells: int = 0


@dataclass(frozen=True)
class SummaryStats:
    """Eight-number summary of a loss sample."""

    max: float
    q75: float
    median: float
    q25: float
    min: float
    mean: float
    iqr: float
    std: float

    def as_ordered_pairs(self) -> list:
        """(label, value) pairs in reporting order."""
        return [
            ("max", self.max),
            ("q75", self.q75),
            ("median", self.median),
            ("q25", self.q25),
            ("min", self.min),
            ("mean", self.mean),
            ("iqr", self.iqr),
            ("std", self.std),
        ]


@dataclass(frozen=True)
class UTestResult:
    """Mann-Whitney U comparison of two loss samples (normal approximation)."""

    U: float
    z: float
    p_two_sided: float
    significant: bool
    degenerate: bool = False  # all values identical across both samples


@dataclass(frozen=True)
class RecipeScores:
    """Feature scores for one recipe over its unique selected subsets."""

    scores: np.ndarray
    unique_count: int


@dataclass(frozen=True)
class FeatureScoreTable:
    """Per-feature scores for both recipes with relevance flags."""

    feature_names: tuple
    classic_scores: np.ndarray
    pooled_scores: np.ndarray
    relevant_classic: np.ndarray
    relevant_pooled: np.ndarray
    unique_count_classic: int
    unique_count_pooled: int


@dataclass(frozen=True)
class ExperimentReport:
    """Everything the emitters need: records, summaries, test, scores."""

    config: ExperimentConfig
    feature_names: tuple
    records: tuple
    summary_classic: SummaryStats
    summary_pooled: SummaryStats
    utest: UTestResult
    feature_scores: FeatureScoreTable

    @property
    def classic_losses(self) -> list:
        return [r.classic.test_loss for r in self.records]

    @property
    def pooled_losses(self) -> list:
        return [r.pooled.test_loss for r in self.records]


def summarize(losses) -> SummaryStats:
    """Eight summary statistics; quantiles use linear interpolation of order
    statistics (index (n-1)p + 1, one-based), std is the sample standard
    deviation and collapses to 0 for a single observation."""
    x = np.asarray(losses, dtype=np.float64).ravel()
    if x.size == 0:
        raise DataError("cannot summarize an empty sample")
    q25, median, q75 = (float(q) for q in np.quantile(x, [0.25, 0.5, 0.75]))
    return SummaryStats(
        max=float(x.max()),
        q75=q75,
        median=median,
        q25=q25,
        min=float(x.min()),
        mean=float(x.mean()),
        iqr=q75 - q25,
        std=float(x.std(ddof=1)) if x.size > 1 else 0.0,
    )


def _midranks(values: np.ndarray) -> np.ndarray:
    """Ranks starting at 1; tied values share the mean of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * ((i + 1) + (j + 1))
        i = j + 1
    return ranks


def mann_whitney(a, b, alpha: float = 0.05) -> UTestResult:
    """Two-sided Mann-Whitney U test via the tie-corrected normal
    approximation with a 0.5 continuity correction.

    Returns the U statistic of the first sample. When every value in both
    samples is identical the variance is zero; the result is flagged with
    U = nm/2 and p = 1.
    """
    x = np.asarray(a, dtype=np.float64).ravel()
    y = np.asarray(b, dtype=np.float64).ravel()
    n, m = x.size, y.size
    if n < 1 or m < 1:
        raise DataError("both samples must be non-empty")
    pooled = np.concatenate([x, y])
    ranks = _midranks(pooled)
    u_a = float(ranks[:n].sum() - n * (n + 1) / 2.0)
    mu = n * m / 2.0
    N = n + m
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(counts.astype(np.float64) ** 3 - counts))
    var = (n * m / 12.0) * ((N + 1.0) - tie_term / (N * (N - 1.0))) if N > 1 else 0.0
    if var <= 0.0:
        return UTestResult(U=mu, z=0.0, p_two_sided=1.0, significant=False, degenerate=True)
    diff = u_a - mu
    if diff > 0.0:
        z = (diff - 0.5) / math.sqrt(var)
    elif diff < 0.0:
        z = (diff + 0.5) / math.sqrt(var)
    else:
        z = 0.0
    p = min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))
    return UTestResult(U=u_a, z=z, p_two_sided=p, significant=p < alpha)


def compute_feature_scores(records, recipe: str, d: int, feature_names) -> RecipeScores:
    """Score(f) = fraction of the recipe's unique selected subsets containing
    feature f. Subsets are deduplicated by set equality across iterations."""
    if not records:
        raise DataError("no iteration records")
    if recipe not in ("classic", "pooled"):
        raise DataError(f"unknown recipe {recipe!r}")
    if len(tuple(feature_names)) != d:
        raise DataError("feature_names length must equal d")
    unique = {frozenset(getattr(r, recipe).subset) for r in records}
    scores = np.zeros(d)
    for subset in unique:
        for j in subset:
            scores[j] += 1.0
    scores /= len(unique)
    return RecipeScores(scores=scores, unique_count=len(unique))


def mark_relevant(scores, cutoff: float) -> np.ndarray:
    """Flag scores at or above the cutoff."""
    s = np.asarray(scores, dtype=np.float64)
    if np.any(s < 0.0) or np.any(s > 1.0):
        raise DataError("scores must lie in [0, 1]")
    return s >= cutoff


def build_feature_score_table(records, d: int, feature_names, cutoff: float) -> FeatureScoreTable:
    classic = compute_feature_scores(records, "classic", d, feature_names)
    pooled = compute_feature_scores(records, "pooled", d, feature_names)
    return FeatureScoreTable(
        feature_names=tuple(feature_names),
        classic_scores=classic.scores,
        pooled_scores=pooled.scores,
        relevant_classic=mark_relevant(classic.scores, cutoff),
        relevant_pooled=mark_relevant(pooled.scores, cutoff),
        unique_count_classic=classic.unique_count,
        unique_count_pooled=pooled.unique_count,
    )


def _test_loss(dataset: Dataset, split: HoldoutSplit, cell, subset) -> float:
    rows = np.asarray(split.test_indices, dtype=np.int64)
    X = np.ascontiguousarray(dataset.features[rows][:, subset])
    if cell.standardizer is not None:
        X = apply_standardizer(cell.standardizer, X)
    return zero_one_loss(predict(cell.model, X), dataset.labels[rows])


def run_iteration(dataset: Dataset, cfg: ExperimentConfig, iteration_index: int) -> IterationRecord:
    """One tandem iteration: split, folds, one shared loss table, both
    recipes selected, finalized and tested."""
    split = stratified_holdout(
        dataset.labels, cfg.test_fraction, derive_rng(cfg.master_seed, "holdout", iteration_index)
    )
    folds = stratified_kfold(
        dataset.labels, split.dev_indices, cfg.K, derive_rng(cfg.master_seed, "folds", iteration_index)
    )
    subsets = enumerate_subsets(dataset.n_features, cfg.max_subset_size)
    table = build_loss_table(dataset, split, folds, subsets, cfg.train_cfg, cfg.standardize)

    k_c, s_c = select_classic(table)
    cell_c = finalize_model(
        dataset, split, folds, k_c, table.subsets[s_c], cfg.train_cfg, cfg.standardize
    )
    classic = SelectionOutcome(
        recipe="classic",
        subset=table.subsets[s_c],
        fold=k_c,
        selection_loss=float(table.losses[k_c, s_c]),
        model=cell_c.model,
        standardizer=cell_c.standardizer,
        test_loss=_test_loss(dataset, split, cell_c, table.subsets[s_c]),
    )

    s_p, k_p = select_pooled(table)
    cell_p = finalize_model(
        dataset, split, folds, k_p, table.subsets[s_p], cfg.train_cfg, cfg.standardize
    )
    pooled = SelectionOutcome(
        recipe="pooled",
        subset=table.subsets[s_p],
        fold=k_p,
        selection_loss=float(pool_losses(table)[s_p]),
        model=cell_p.model,
        standardizer=cell_p.standardizer,
        test_loss=_test_loss(dataset, split, cell_p, table.subsets[s_p]),
    )

    return IterationRecord(
        index=iteration_index,
        split=split,
        folds=folds,
        classic=classic,
        pooled=pooled,
        unconverged_cells=int(
            np.sum(~table.convergence_flags & ~table.degenerate_flags)
        ),
        degenerate_cells=int(np.sum(table.degenerate_flags)),
    )


def run_experiment(dataset: Dataset, cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Run all iterations and aggregate the comparison."""
    indices = range(cfg.iterations)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = tuple(pool.map(lambda i: run_iteration(dataset, cfg, i), indices))
    else:
        records = tuple(run_iteration(dataset, cfg, i) for i in indices)
    classic_losses = [r.classic.test_loss for r in records]
    pooled_losses = [r.pooled.test_loss for r in records]
    return ExperimentReport(
        config=cfg,
        feature_names=dataset.feature_names,
        records=records,
        summary_classic=summarize(classic_losses),
        summary_pooled=summarize(pooled_losses),
        utest=mann_whitney(classic_losses, pooled_losses, cfg.alpha),
        feature_scores=build_feature_score_table(
            records, dataset.n_features, dataset.feature_names, cfg.relevance_cutoff
        ),
    )
