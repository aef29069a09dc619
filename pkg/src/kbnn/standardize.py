"""Affine feature/target standardization shared by datasets and models."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Standardizer:
    """Per-column z-scoring stats (fitted on training data only).

    Columns with zero spread get scale 1 so transforms stay well defined.
    """

    feature_mean: np.ndarray
    feature_std: np.ndarray
    target_mean: np.ndarray
    target_std: np.ndarray

    def __post_init__(self):
        self.feature_mean = np.atleast_1d(np.asarray(self.feature_mean, dtype=float))
        self.feature_std = np.atleast_1d(np.asarray(self.feature_std, dtype=float))
        self.target_mean = np.atleast_1d(np.asarray(self.target_mean, dtype=float))
        self.target_std = np.atleast_1d(np.asarray(self.target_std, dtype=float))
        for name in ("feature_std", "target_std"):
            arr = getattr(self, name)
            if np.any(arr <= 0.0):
                raise ValueError(f"{name} must be positive")

    @classmethod
    def fit(cls, x: np.ndarray, y: np.ndarray,
            standardize_features: bool = True,
            standardize_targets: bool = True) -> "Standardizer":
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if standardize_features:
            fm, fs = x.mean(axis=0), x.std(axis=0)
            fs = np.where(fs > 0.0, fs, 1.0)
        else:
            fm, fs = np.zeros(x.shape[1]), np.ones(x.shape[1])
        if standardize_targets:
            tm, ts = y.mean(axis=0), y.std(axis=0)
            ts = np.where(ts > 0.0, ts, 1.0)
        else:
            tm, ts = np.zeros(y.shape[1]), np.ones(y.shape[1])
        return cls(fm, fs, tm, ts)

    @classmethod
    def identity(cls, n_features: int, n_targets: int = 1) -> "Standardizer":
        return cls(np.zeros(n_features), np.ones(n_features),
                   np.zeros(n_targets), np.ones(n_targets))

    @property
    def is_identity(self) -> bool:
        return (np.all(self.feature_mean == 0.0) and np.all(self.feature_std == 1.0)
                and np.all(self.target_mean == 0.0) and np.all(self.target_std == 1.0))

    def transform_features(self, x):
        return (np.asarray(x, dtype=float) - self.feature_mean) / self.feature_std

    def transform_targets(self, y):
        return (np.asarray(y, dtype=float) - self.target_mean) / self.target_std

    def inverse_features(self, x):
        return np.asarray(x, dtype=float) * self.feature_std + self.feature_mean

    def inverse_targets(self, y):
        return np.asarray(y, dtype=float) * self.target_std + self.target_mean

    def inverse_target_variance(self, var):
        return np.asarray(var, dtype=float) * self.target_std ** 2

    def spec(self) -> dict:
        return {
            "feature_mean": self.feature_mean.tolist(),
            "feature_std": self.feature_std.tolist(),
            "target_mean": self.target_mean.tolist(),
            "target_std": self.target_std.tolist(),
        }

    @classmethod
    def from_spec(cls, spec: dict) -> "Standardizer":
        return cls(
            np.asarray(spec["feature_mean"], dtype=float),
            np.asarray(spec["feature_std"], dtype=float),
            np.asarray(spec["target_mean"], dtype=float),
            np.asarray(spec["target_std"], dtype=float),
        )

    def __eq__(self, other):
        if not isinstance(other, Standardizer):
            return NotImplemented
        return (np.array_equal(self.feature_mean, other.feature_mean)
                and np.array_equal(self.feature_std, other.feature_std)
                and np.array_equal(self.target_mean, other.target_mean)
                and np.array_equal(self.target_std, other.target_std))
