"""Data model: CSV ingestion, synthetic data, stratified splits, scaling.

Labels are binary and encoded +1/-1 (in the motivating use case: right
atrium -> +1, left atrium -> -1). All index lists produced here are sorted
ascending, so downstream row selection is independent of shuffling order;
the randomness decides membership only.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .rng import check_seed, derive_rng

STD_FLOOR = 1e-12

# beat-to-beat statistics of the four VCG loop parameters, in the
# conventional order: statistic varies fastest within each parameter
DEFAULT_FEATURE_NAMES = tuple(
    f"{stat}({param})"
    for param in ("phi_AZ", "phi_EL", "psi_PL", "psi_PG")
    for stat in ("Mean", "Variance", "Skewness", "Kurtosis")
)

_LABEL_MAP = {"R": 1, "L": -1, "+1": 1, "-1": -1, "1": 1, "0": -1}


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (n x d), labels in {+1, -1}, and d feature names."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64).ravel()
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got ndim={X.ndim}")
        n, d = X.shape
        if y.shape[0] != n:
            raise DataError(f"{n} rows but {y.shape[0]} labels")
        if not np.all(np.isfinite(X)):
            bad = np.argwhere(~np.isfinite(X))[0]
            raise DataError(f"non-finite value at row {bad[0]}, column {bad[1]}")
        if not np.all((y == 1) | (y == -1)):
            raise DataError("labels must be encoded +1/-1")
        if np.all(y == 1) or np.all(y == -1):
            raise DataError("both classes must be present")
        if len(self.feature_names) != d:
            raise DataError(
                f"{d} feature columns but {len(self.feature_names)} names"
            )
        if any(not isinstance(s, str) or not s for s in self.feature_names):
            raise DataError("feature names must be non-empty strings")
        if len(set(self.feature_names)) != d:
            raise DataError("feature names must be distinct")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class HoldoutSplit:
    """Development/test partition of {0..n-1}; both parts hold both classes."""

    dev_indices: tuple
    test_indices: tuple


@dataclass(frozen=True)
class FoldAssignment:
    """K disjoint folds covering the development indices."""

    folds: tuple  # tuple of tuples of sample indices

    @property
    def K(self) -> int:
        return len(self.folds)


@dataclass(frozen=True)
class SynthConfig:
    """Synthetic two-class Gaussian data with optional planted features.

    A planted feature (j, delta) separates the class-conditional means by
    delta (class c mean is c * delta / 2, unit variance); every other
    feature is standard normal noise independent of the class.
    """

    n_per_class: tuple = (31, 25)
    d: int = 16
    planted: tuple = ()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "n_per_class", tuple(self.n_per_class))
        object.__setattr__(
            self, "planted", tuple((int(j), float(delta)) for j, delta in self.planted)
        )
        n_pos, n_neg = self.n_per_class
        if n_pos < 1 or n_neg < 1:
            raise DataError(f"per-class counts must be >= 1, got {self.n_per_class}")
        if self.d < 1:
            raise DataError(f"d must be >= 1, got {self.d}")
        idx = [j for j, _ in self.planted]
        if len(set(idx)) != len(idx):
            raise DataError("planted feature indices must be distinct")
        if any(j < 0 or j >= self.d for j in idx):
            raise DataError(f"planted indices must be in [0, {self.d})")
        if any(delta < 0 for _, delta in self.planted):
            raise DataError("planted effect sizes must be >= 0")
        check_seed(self.seed)


@dataclass(frozen=True)
class Standardizer:
    """Per-feature location/scale fitted on a reference row set."""

    means: np.ndarray
    stds: np.ndarray
    fitted_on: tuple


def default_feature_names(d: int) -> tuple:
    """The 16 canonical variability-feature names, or generic names otherwise."""
    if d == len(DEFAULT_FEATURE_NAMES):
        return DEFAULT_FEATURE_NAMES
    return tuple(f"f{i:02d}" for i in range(d))


def load_csv(path) -> Dataset:
    """Read a dataset from CSV: header ``label,<name1>,...``, rows follow.

    Label values: R/+1/1 map to +1 and L/-1/0 map to -1.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if not header or header[0].strip() != "label":
            raise DataError(f"{path}: first column must be named 'label'")
        names = tuple(s.strip() for s in header[1:])
        if not names:
            raise DataError(f"{path}: no feature columns")
        labels = []
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names) + 1:
                raise DataError(
                    f"{path}: line {lineno} has {len(row)} cells, expected {len(names) + 1}"
                )
            raw = row[0].strip()
            if raw not in _LABEL_MAP:
                raise DataError(f"{path}: line {lineno}: unknown label {raw!r}")
            labels.append(_LABEL_MAP[raw])
            values = []
            for col, cell in enumerate(row[1:], start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: line {lineno}, column {col + 1}: "
                        f"non-numeric value {cell!r}"
                    ) from None
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return Dataset(np.array(rows, dtype=np.float64), np.array(labels), names)


def save_csv(dataset: Dataset, path) -> None:
    """Write a dataset in the format read by :func:`load_csv` (R/L labels)."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", *dataset.feature_names])
        for i in range(dataset.n_samples):
            tag = "R" if dataset.labels[i] == 1 else "L"
            writer.writerow([tag, *(repr(float(v)) for v in dataset.features[i])])


def synthesize_dataset(cfg: SynthConfig) -> Dataset:
    """Draw a synthetic dataset; +1 rows first, then -1 rows."""
    rng = derive_rng(cfg.seed, "synthesize")
    n_pos, n_neg = cfg.n_per_class
    n = n_pos + n_neg
    X = rng.standard_normal((n, cfg.d))
    y = np.concatenate([np.ones(n_pos, dtype=np.int64), -np.ones(n_neg, dtype=np.int64)])
    for j, delta in cfg.planted:
        X[:, j] += y * (delta / 2.0)
    return Dataset(X, y, default_feature_names(cfg.d))


def _class_indices(labels) -> tuple:
    y = np.asarray(labels)
    return np.flatnonzero(y == 1), np.flatnonzero(y == -1)


def stratified_holdout(labels, test_fraction: float, rng: np.random.Generator) -> HoldoutSplit:
    """Hold out floor(test_fraction * n_c) uniformly-chosen samples per class."""
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}")
    pos, neg = _class_indices(labels)
    test = []
    for cls in (pos, neg):
        if cls.size < 2:
            raise DataError("each class needs at least 2 samples for a holdout split")
        n_test = math.floor(test_fraction * cls.size)
        if n_test < 1:
            raise DataError(
                f"test_fraction {test_fraction} leaves an empty test class "
                f"(class size {cls.size})"
            )
        chosen = rng.permutation(cls.size)[:n_test]
        test.extend(cls[chosen].tolist())
    test_set = set(test)
    n = len(np.asarray(labels))
    dev = [i for i in range(n) if i not in test_set]
    return HoldoutSplit(dev_indices=tuple(dev), test_indices=tuple(sorted(test)))


def _largest_remainder(quotas, total) -> np.ndarray:
    """Integer allocation summing to ``total``: floor quotas, then distribute
    the remainder by descending fractional part (first-come on ties)."""
    base = np.floor(quotas).astype(np.int64)
    short = int(total - base.sum())
    if short > 0:
        order = np.argsort(-(quotas - base), kind="stable")
        base[order[:short]] += 1
    return base


def stratified_kfold(labels, dev_indices, K: int, rng: np.random.Generator) -> FoldAssignment:
    """Partition the dev set into K folds, coordinated so that fold sizes and
    per-class counts each differ by at most 1 across folds.

    Fold sizes come first (largest remainder on the dev size); positive-class
    per-fold counts are then allocated by largest remainder with ties among
    equal fractional parts broken at random; the negative class fills the
    remaining seats. The result is validated against the within-1 invariants.
    """
    if K < 2:
        raise DataError(f"K must be >= 2, got {K}")
    dev = np.asarray(sorted(dev_indices), dtype=np.int64)
    n_dev = dev.size
    if K > n_dev:
        raise DataError(f"K={K} exceeds dev size {n_dev}")
    y = np.asarray(labels)
    pos_dev = dev[y[dev] == 1]
    neg_dev = dev[y[dev] == -1]

    sizes = _largest_remainder(np.full(K, n_dev / K), n_dev)
    quotas = pos_dev.size * sizes / n_dev
    pos_counts = np.floor(quotas).astype(np.int64)
    short = int(pos_dev.size - pos_counts.sum())
    if short > 0:
        # rank candidate folds by fractional remainder, random among ties
        remainders = quotas - np.floor(quotas)
        tiebreak = rng.permutation(K)
        order = sorted(range(K), key=lambda k: (-remainders[k], tiebreak[k]))
        for k in order[:short]:
            pos_counts[k] += 1
    neg_counts = sizes - pos_counts

    for counts, avail in ((pos_counts, pos_dev.size), (neg_counts, neg_dev.size)):
        if counts.min() < 0 or counts.sum() != avail:
            raise DataError("stratification is impossible for these class counts")
        if counts.max() - counts.min() > 1:
            raise DataError("per-class fold counts cannot be balanced within 1")

    pos_shuffled = pos_dev[rng.permutation(pos_dev.size)]
    neg_shuffled = neg_dev[rng.permutation(neg_dev.size)]
    folds = []
    p = q = 0
    for k in range(K):
        members = np.concatenate(
            [pos_shuffled[p : p + pos_counts[k]], neg_shuffled[q : q + neg_counts[k]]]
        )
        p += pos_counts[k]
        q += neg_counts[k]
        folds.append(tuple(sorted(members.tolist())))
    return FoldAssignment(folds=tuple(folds))


def fit_standardizer(features, reference_indices) -> Standardizer:
    """Per-feature mean/std over the reference rows; stds below the floor
    are replaced by 1 so constant columns map to zero."""
    ref = tuple(reference_indices)
    if not ref:
        raise DataError("reference_indices must be non-empty")
    X = np.asarray(features, dtype=np.float64)[list(ref), :]
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds = np.where(stds < STD_FLOOR, 1.0, stds)
    return Standardizer(means=means, stds=stds, fitted_on=ref)


def apply_standardizer(standardizer: Standardizer, features) -> np.ndarray:
    """Center and scale with the fitted statistics (no refitting)."""
    X = np.asarray(features, dtype=np.float64)
    return (X - standardizer.means) / standardizer.stds
