"""Evaluation metrics: RMSE, average Gaussian negative log-likelihood,
classification accuracy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import VAR_FLOOR

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass
class EvalResult:
    rmse: float
    nll: float
    accuracy: float | None
    n: int
    variance_floored: bool = False

    def __post_init__(self):
        if self.rmse < 0.0:
            raise ValueError("rmse must be >= 0")
        if self.accuracy is not None and not (0.0 <= self.accuracy <= 1.0):
            raise ValueError("accuracy must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "rmse": self.rmse,
            "nll": self.nll,
            "accuracy": self.accuracy,
            "n": self.n,
            "variance_floored": self.variance_floored,
        }


def _as_columns(values) -> np.ndarray:
    """(n,) -> (n, 1); 2-D passes through (instances x output dims)."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr[:, None]
    return arr


def rmse(preds, targets) -> float:
    preds = np.asarray(preds, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if preds.shape != targets.shape:
        raise ValueError(f"shape mismatch: {preds.shape} vs {targets.shape}")
    if preds.size == 0:
        raise ValueError("rmse needs at least one prediction")
    return float(np.sqrt(np.mean((preds - targets) ** 2)))


def avg_nll(pred_means, pred_vars, targets, floor: float = VAR_FLOOR) -> float:
    """Average Gaussian negative log-likelihood (nats):

        mean_i [ (y_i - mu_i)^2 / var_i + log var_i ] / 2 + log(2 pi) / 2

    summed over output dimensions for multi-output targets. Variances below
    ``floor`` are floored.
    """
    mu = _as_columns(pred_means)
    var = _as_columns(pred_vars)
    y = _as_columns(targets)
    if mu.shape != var.shape or mu.shape != y.shape:
        raise ValueError(f"shape mismatch: {mu.shape}, {var.shape}, {y.shape}")
    if mu.size == 0:
        raise ValueError("avg_nll needs at least one prediction")
    var = np.maximum(var, floor)
    per_instance = 0.5 * np.sum((y - mu) ** 2 / var + np.log(var), axis=1)
    e = mu.shape[1]
    return float(np.mean(per_instance) + e * _HALF_LOG_2PI)


def accuracy(pred_means, labels, threshold: float = 0.5) -> float:
    """Fraction of predictions whose thresholded class matches the label.
    Means exactly at the threshold count as class 1."""
    preds = np.asarray(pred_means, dtype=float).ravel()
    labels = np.asarray(labels, dtype=float).ravel()
    if preds.shape != labels.shape:
        raise ValueError(f"shape mismatch: {preds.shape} vs {labels.shape}")
    if preds.size == 0:
        raise ValueError("accuracy needs at least one prediction")
    return float(np.mean((preds >= threshold) == (labels >= threshold)))


def evaluate_predictions(pred_means, pred_vars, targets,
                         classification: bool = False,
                         threshold: float = 0.5) -> EvalResult:
    """Bundle RMSE/NLL (and accuracy for classification outputs)."""
    mu = np.asarray(pred_means, dtype=float)
    var = np.asarray(pred_vars, dtype=float)
    y = np.asarray(targets, dtype=float)
    result_acc = accuracy(mu, y, threshold) if classification else None
    return EvalResult(
        rmse=rmse(mu, y),
        nll=avg_nll(mu, var, y),
        accuracy=result_acc,
        n=int(_as_columns(mu).shape[0]),
        variance_floored=bool(np.any(var < VAR_FLOOR)),
    )
