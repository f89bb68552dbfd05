"""Soft-margin linear SVM: training, prediction and the zero-one loss.

Training solves the dual quadratic program

    max  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j <x_i, x_j>
    s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0

by deterministic pairwise ascent (see ``_kernels``). Models keep their dual
coefficients so the optimality conditions can be audited after the fact.
"""

from dataclasses import dataclass, field

import numpy as np

from ._kernels import smo_train
from .errors import DataError, TrainingError


@dataclass(frozen=True)
class TrainConfig:
    """Solver settings. The box constraint defaults to 1."""

    box_constraint: float = 1.0
    kkt_tolerance: float = 1e-3
    max_sweeps: int = 100_000

    def __post_init__(self):
        if not self.box_constraint > 0:
            raise DataError(f"box_constraint must be > 0, got {self.box_constraint}")
        if not self.kkt_tolerance > 0:
            raise DataError(f"kkt_tolerance must be > 0, got {self.kkt_tolerance}")
        if self.max_sweeps < 1:
            raise DataError(f"max_sweeps must be >= 1, got {self.max_sweeps}")


@dataclass(frozen=True)
class SvmModel:
    """Trained linear classifier with its dual state.

    ``converged`` is False when the solver hit the sweep cap with KKT
    violations remaining; the model is still usable and the flag is
    surfaced in experiment reports.
    """

    weights: np.ndarray
    bias: float
    alphas: np.ndarray
    C: float
    converged: bool = True

    def decision_values(self, features: np.ndarray) -> np.ndarray:
        return features @ self.weights + self.bias


def _as_float_matrix(features) -> np.ndarray:
    X = np.ascontiguousarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise DataError(f"features must be a 2-D matrix, got ndim={X.ndim}")
    return X


def train_svm(features, labels, cfg: TrainConfig = TrainConfig()) -> SvmModel:
    """Train on rows of ``features`` with labels in {+1, -1}."""
    X = _as_float_matrix(features)
    y = np.asarray(labels, dtype=np.float64).ravel()
    n = X.shape[0]
    if y.shape[0] != n:
        raise DataError(f"{n} rows but {y.shape[0]} labels")
    if n < 2:
        raise TrainingError(f"need at least 2 samples, got {n}")
    if not np.all(np.isfinite(X)):
        raise DataError("features contain non-finite values")
    if not np.all((y == 1.0) | (y == -1.0)):
        raise DataError("labels must be +1 or -1")
    if np.all(y == y[0]):
        raise TrainingError("training data contains a single class")
    alphas, w, b, converged, _ = smo_train(
        X, y, float(cfg.box_constraint), float(cfg.kkt_tolerance), int(cfg.max_sweeps)
    )
    return SvmModel(
        weights=w, bias=float(b), alphas=alphas, C=float(cfg.box_constraint),
        converged=bool(converged),
    )


def predict(model: SvmModel, features) -> np.ndarray:
    """Classify rows; a decision value of exactly 0 maps to +1."""
    X = _as_float_matrix(features)
    if X.shape[1] != model.weights.shape[0]:
        raise DataError(
            f"model has {model.weights.shape[0]} features, input has {X.shape[1]}"
        )
    return np.where(model.decision_values(X) >= 0.0, 1, -1).astype(np.int64)


def zero_one_loss(predicted, truth) -> float:
    """Fraction of mismatched labels."""
    p = np.asarray(predicted).ravel()
    t = np.asarray(truth).ravel()
    if p.shape[0] != t.shape[0]:
        raise DataError(f"length mismatch: {p.shape[0]} vs {t.shape[0]}")
    if p.shape[0] == 0:
        raise DataError("empty label vectors")
    return float(np.mean(p != t))


def dual_objective(model: SvmModel, features, labels) -> float:
    """Value of the dual objective at the model's coefficients."""
    X = _as_float_matrix(features)
    y = np.asarray(labels, dtype=np.float64).ravel()
    ay = model.alphas * y
    return float(model.alphas.sum() - 0.5 * ay @ (X @ X.T) @ ay)


@dataclass(frozen=True)
class KktAudit:
    """Worst-case violations of the optimality conditions on training data."""

    box_violation: float
    equality_violation: float
    weight_residual: float
    margin_violation: float
    details: dict = field(default_factory=dict, compare=False)

    def max_violation(self) -> float:
        return max(
            self.box_violation,
            self.equality_violation,
            self.weight_residual,
            self.margin_violation,
        )


def audit_kkt(model: SvmModel, features, labels) -> KktAudit:
    """Measure how far the model is from satisfying its own KKT conditions.

    ``margin_violation`` is the largest excess over the complementary
    slackness bands: a_i = 0 requires y_i f(x_i) >= 1, a_i = C requires
    y_i f(x_i) <= 1, and unbound coefficients require y_i f(x_i) = 1.
    """
    X = _as_float_matrix(features)
    y = np.asarray(labels, dtype=np.float64).ravel()
    a = model.alphas
    C = model.C
    box = float(max(np.max(-a, initial=0.0), np.max(a - C, initial=0.0)))
    equality = float(abs(np.sum(a * y)))
    w_expected = (a * y) @ X
    weight_residual = float(np.max(np.abs(w_expected - model.weights), initial=0.0))
    margins = y * model.decision_values(X)
    worst = 0.0
    for i in range(X.shape[0]):
        if a[i] < C:
            worst = max(worst, 1.0 - margins[i])
        if a[i] > 0.0:
            worst = max(worst, margins[i] - 1.0)
    return KktAudit(
        box_violation=box,
        equality_violation=equality,
        weight_residual=weight_residual,
        margin_violation=worst,
        details={"margins": margins},
    )
