"""Gaussian moment containers and PSD-safe symmetric linear algebra.

All covariance-producing routines in this package route through the helpers
here so that matrices stay symmetric, diagonals stay above ``VAR_FLOOR``, and
near-singular solves degrade gracefully instead of blowing up gains.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .exceptions import SingularMatrixError

# Floor for every variance / covariance diagonal that enters a gain
# denominator. Keeps division-based gains finite under posterior collapse.
VAR_FLOOR = 1e-9

# Jitter escalation ladder for symmetric positive-definite solves.
_JITTERS = (0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4)

# Symmetry check tolerance (relative) for GaussianVector construction.
_SYM_RTOL = 1e-12


@dataclass(frozen=True)
class ScalarGaussian:
    """A univariate Gaussian (mean, variance). Variance must be >= 0."""

    mean: float
    variance: float

    def __post_init__(self):
        if not np.isfinite(self.mean) or not np.isfinite(self.variance):
            raise ValueError("ScalarGaussian requires finite mean and variance")
        if self.variance < 0.0:
            raise ValueError(f"negative variance: {self.variance}")


@dataclass
class GaussianVector:
    """A multivariate Gaussian (mean vector, covariance matrix).

    The covariance is symmetrized on construction and its diagonal is floored
    at ``VAR_FLOOR``; a grossly asymmetric input is rejected.
    """

    mean: np.ndarray
    covariance: np.ndarray
    floor: float = field(default=VAR_FLOOR, repr=False)

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if self.mean.ndim != 1:
            raise ValueError("mean must be a 1-D vector")
        k = self.mean.shape[0]
        if cov.shape != (k, k):
            raise ValueError(f"covariance shape {cov.shape} does not match mean length {k}")
        scale = max(float(np.abs(cov).max()), 1.0)
        if np.abs(cov - cov.T).max() > _SYM_RTOL * scale:
            raise ValueError("covariance is not symmetric within tolerance")
        cov = symmetrize(cov)
        d = np.einsum("ii->i", cov)
        d[:] = np.maximum(d, self.floor)
        self.covariance = cov

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Return (M + M^T)/2. Raises ValueError for non-square input."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return 0.5 * (m + m.T)


def spd_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve (A + jitter*I) X = B for symmetric A via Cholesky factorization.

    The jitter starts at 0 and escalates 1e-12, 1e-10, ... up to 1e-4 on
    factorization failure. Raises SingularMatrixError (carrying the last
    jitter tried) if no factorization succeeds.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"incompatible shapes {a.shape} and {b.shape}")
    eye = np.eye(a.shape[0])
    for jitter in _JITTERS:
        try:
            factor = cho_factor(a + jitter * eye, lower=True, check_finite=False)
        except (LinAlgError, ValueError):
            continue
        return cho_solve(factor, b, check_finite=False)
    raise SingularMatrixError(
        f"symmetric solve failed up to jitter {_JITTERS[-1]:g}", max_jitter=_JITTERS[-1]
    )


def _cholesky_ok(m: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(m)
        return True
    except np.linalg.LinAlgError:
        return False


def clamp_psd(m: np.ndarray, floor: float = VAR_FLOOR) -> np.ndarray:
    """Repair a symmetric matrix into a valid covariance.

    Fast path: if the diagonal is already >= ``floor`` and a trial Cholesky
    succeeds, the (symmetrized) matrix is returned as-is. Otherwise negative
    eigenvalues are clipped to zero and the diagonal floored.
    """
    m = symmetrize(m)
    d = np.diagonal(m)
    if np.all(d >= floor) and _cholesky_ok(m):
        return m
    w, v = np.linalg.eigh(m)
    out = symmetrize((v * np.maximum(w, 0.0)) @ v.T)
    dd = np.einsum("ii->i", out)
    dd[:] = np.maximum(dd, floor)
    return out


def floor_diagonal_stack(stack: np.ndarray, floor: float = VAR_FLOOR) -> None:
    """Floor the diagonals of a (n, k, k) stack of matrices in place."""
    d = np.einsum("nii->ni", stack)
    d[:] = np.maximum(d, floor)


def clamp_psd_stack(stack: np.ndarray, floor: float = VAR_FLOOR) -> np.ndarray:
    """Floor diagonals of a matrix stack and eigen-clip members that fail a
    trial factorization. The common case (all factorizable) costs one batched
    Cholesky."""
    floor_diagonal_stack(stack, floor)
    try:
        np.linalg.cholesky(stack)
        return stack
    except np.linalg.LinAlgError:
        pass
    for i in range(stack.shape[0]):
        if not _cholesky_ok(stack[i]):
            stack[i] = clamp_psd(stack[i], floor)
    return stack
