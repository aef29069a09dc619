"""Synthetic generators and CSV ingestion with splits and standardization.

Generators are pure given a seed. CSV files are user-supplied (comma
separated, header row, numeric cells); nothing is ever downloaded.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .standardize import Standardizer


@dataclass
class DatasetSplit:
    """Standardized train/test matrices plus the stats to undo the scaling.

    ``train_x``/``test_x`` have shape (n, d); ``train_y``/``test_y`` have
    shape (n, e). Targets of classification datasets carry identity stats.
    """

    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    standardizer: Standardizer

    @property
    def n_features(self) -> int:
        return self.train_x.shape[1]

    @property
    def n_targets(self) -> int:
        return self.train_y.shape[1]

    def raw_test_targets(self) -> np.ndarray:
        return self.standardizer.inverse_targets(self.test_y)


def make_split(x, y, test_fraction: float = 0.1, seed=0,
               standardize_features: bool = True,
               standardize_targets: bool = True) -> DatasetSplit:
    """Seeded permutation split; stats are fitted on the train part only."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"x has {x.shape[0]} rows, y has {y.shape[0]}")
    if not (0.0 < test_fraction < 1.0):
        raise ValueError("test_fraction must lie in (0, 1)")
    n = x.shape[0]
    n_test = max(1, int(round(n * test_fraction)))
    if n_test >= n:
        raise ValueError("split leaves no training data")
    perm = np.random.default_rng(seed).permutation(n)
    test_idx, train_idx = perm[:n_test], perm[n_test:]
    stats = Standardizer.fit(x[train_idx], y[train_idx],
                             standardize_features, standardize_targets)
    return DatasetSplit(
        train_x=stats.transform_features(x[train_idx]),
        train_y=stats.transform_targets(y[train_idx]),
        test_x=stats.transform_features(x[test_idx]),
        test_y=stats.transform_targets(y[test_idx]),
        standardizer=stats,
    )


# ---------------------------------------------------------------------------
# synthetic generators


@dataclass(frozen=True)
class CubicSpec:
    n: int = 800
    noise_std: float = 3.0
    x_range: tuple[float, float] = (-4.0, 4.0)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.noise_std < 0.0:
            raise ValueError("noise_std must be >= 0")


@dataclass(frozen=True)
class MoonsSpec:
    n: int = 1500
    noise_std: float = 0.1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.noise_std < 0.0:
            raise ValueError("noise_std must be >= 0")


@dataclass(frozen=True)
class CirclesSpec:
    n: int = 1500
    noise_std: float = 0.1
    radius_factor: float = 0.8

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.noise_std < 0.0:
            raise ValueError("noise_std must be >= 0")
        if not (0.0 < self.radius_factor < 1.0):
            raise ValueError("radius_factor must lie in (0, 1)")


@dataclass(frozen=True)
class RotatingMoonsSpec:
    initial_n: int = 1500
    per_step_n: int = 100
    steps: int = 18
    step_degrees: float = 20.0
    noise_std: float = 0.1


def cubic_points(spec: CubicSpec, seed=0):
    """Draw (x, y) with x ~ Uniform over the range and y = x^3 + noise."""
    rng = np.random.default_rng(seed)
    lo, hi = spec.x_range
    x = rng.uniform(lo, hi, spec.n)
    y = x ** 3 + rng.normal(0.0, spec.noise_std, spec.n)
    return x[:, None], y


def gen_cubic(spec: CubicSpec, seed=0, test_fraction: float = 0.1,
              standardize: bool = True) -> DatasetSplit:
    x, y = cubic_points(spec, seed)
    return make_split(x, y, test_fraction, seed,
                      standardize_features=standardize,
                      standardize_targets=standardize)


def gen_moons(n: int, noise_std: float = 0.1, seed=0):
    """Two interleaving half-circles: class 0 on (cos t, sin t) and class 1
    on (1 - cos t, 1 - sin t - 1/2), t on a uniform grid over [0, pi], plus
    isotropic Gaussian noise. Labels are balanced."""
    rng = np.random.default_rng(seed)
    n0 = n // 2
    n1 = n - n0
    t0 = np.linspace(0.0, np.pi, n0)
    t1 = np.linspace(0.0, np.pi, n1)
    x = np.vstack([
        np.column_stack([np.cos(t0), np.sin(t0)]),
        np.column_stack([1.0 - np.cos(t1), 1.0 - np.sin(t1) - 0.5]),
    ])
    labels = np.concatenate([np.zeros(n0), np.ones(n1)])
    if noise_std > 0.0:
        x = x + rng.normal(0.0, noise_std, x.shape)
    return x, labels


def gen_circles(n: int, noise_std: float = 0.1, radius_factor: float = 0.8, seed=0):
    """Concentric circles: outer radius 1 (class 0), inner radius
    ``radius_factor`` (class 1), plus isotropic Gaussian noise."""
    rng = np.random.default_rng(seed)
    n0 = n // 2
    n1 = n - n0
    t0 = np.linspace(0.0, 2.0 * np.pi, n0, endpoint=False)
    t1 = np.linspace(0.0, 2.0 * np.pi, n1, endpoint=False)
    x = np.vstack([
        np.column_stack([np.cos(t0), np.sin(t0)]),
        radius_factor * np.column_stack([np.cos(t1), np.sin(t1)]),
    ])
    labels = np.concatenate([np.zeros(n0), np.ones(n1)])
    if noise_std > 0.0:
        x = x + rng.normal(0.0, noise_std, x.shape)
    return x, labels


def rotate_moons(points: np.ndarray, degrees: float, center=None) -> np.ndarray:
    """Rotate 2-D points about the dataset centroid (or an explicit center)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != 2:
        raise ValueError("rotation expects (n, 2) points")
    if center is None:
        center = points.mean(axis=0)
    theta = np.deg2rad(degrees)
    rot = np.array([[np.cos(theta), -np.sin(theta)],
                    [np.sin(theta), np.cos(theta)]])
    return (points - center) @ rot.T + center


# ---------------------------------------------------------------------------
# CSV ingestion


def read_csv_columns(path):
    """Parse a numeric CSV with header. Returns (header, (n, c) array).
    Errors name the offending row/column."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {line_no} has {len(row)} cells, header has {len(header)}"
                )
            values = []
            for col, cell in enumerate(row):
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric cell at row {line_no}, column "
                        f"{header[col]!r}: {cell!r}"
                    ) from None
                if not np.isfinite(v):
                    raise ValueError(
                        f"{path}: non-finite value at row {line_no}, column {header[col]!r}"
                    )
                values.append(v)
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return header, np.asarray(rows, dtype=float)


def load_csv(path, target_column, test_fraction: float = 0.1, seed=0,
             standardize: bool = True) -> DatasetSplit:
    """Load a tabular regression CSV and split it.

    ``target_column`` selects the target by header name or integer index;
    all remaining columns become features. Requires >= 10 rows.
    """
    header, data = read_csv_columns(path)
    if isinstance(target_column, int) or (isinstance(target_column, str)
                                          and target_column.lstrip("-").isdigit()):
        idx = int(target_column)
        if idx < 0:
            idx += len(header)
        if not (0 <= idx < len(header)):
            raise ValueError(f"{path}: target column index {target_column} out of range")
    else:
        if target_column not in header:
            raise ValueError(
                f"{path}: target column {target_column!r} not in header {header}"
            )
        idx = header.index(target_column)
    if data.shape[0] < 10:
        raise ValueError(f"{path}: need at least 10 rows, got {data.shape[0]}")
    y = data[:, idx]
    x = np.delete(data, idx, axis=1)
    return make_split(x, y, test_fraction, seed,
                      standardize_features=standardize,
                      standardize_targets=standardize)
