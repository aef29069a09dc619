"""Closed-form Gaussian moment propagation through scalar activations.

For an input a ~ N(mean, variance), each activation computes the output mean
E[f(a)], the output variance Var[f(a)], and the input-output covariance
Cov(a, f(a)). These three numbers drive both the predictive forward pass and
the smoothing gains of the backward pass.

Piece-wise linear activations (ReLU included) have exact moments. The
sigmoid-family activations in this package are *defined* as the probit
surrogate Phi(lambda*a) with lambda = sqrt(pi/8) (and its affine transport
for tanh), for which all three moments are also exact: the mean via the
Gaussian-CDF smoothing identity, the variance via Owen's T function, and the
covariance via Stein's lemma. The surrogate tracks the logistic function to
within ~0.01 everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, owens_t

from .gaussian import ScalarGaussian

_LAMBDA = np.sqrt(np.pi / 8.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _npdf(x):
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


@dataclass(frozen=True)
class ActivationMoments:
    """Moments of f(a) for a single Gaussian input: mean, variance, and
    Cov(a, f(a))."""

    mean: float
    variance: float
    cross_cov: float


def _as_input(mean, variance):
    mean = np.asarray(mean, dtype=float)
    variance = np.asarray(variance, dtype=float)
    if np.any(variance < 0.0):
        raise ValueError("input variance must be non-negative")
    return mean, variance


def _finalize(mean, var, cov, in_var):
    # Clip fp cancellation residue: variance >= 0 and Cauchy-Schwarz on cov.
    var = np.maximum(var, 0.0)
    bound = np.sqrt(var * in_var)
    cov = np.clip(cov, -bound, bound)
    return mean, var, cov


class Activation:
    """Base class; subclasses provide vectorized ``moments`` and pointwise
    ``__call__``. ``bounded_output`` marks [0, 1]-valued activations used for
    classification outputs."""

    name = "base"
    bounded_output = False

    def moments(self, mean, variance):
        raise NotImplementedError

    def __call__(self, a):
        raise NotImplementedError

    def spec(self) -> dict:
        return {"name": self.name}


@dataclass(frozen=True)
class Linear(Activation):
    name = "linear"

    def moments(self, mean, variance):
        mean, variance = _as_input(mean, variance)
        return mean, variance, variance.copy()

    def __call__(self, a):
        return np.asarray(a, dtype=float)


@dataclass(frozen=True)
class PiecewiseLinear(Activation):
    """f(a) = max(alpha*a, beta*a) with 0 <= alpha <= 1, beta >= 0, alpha <= beta.

    ReLU is (0, 1); the identity is (1, 1). Moments are exact.
    """

    alpha: float
    beta: float
    name = "piecewise_linear"

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.alpha > self.beta:
            raise ValueError(f"alpha={self.alpha} must be <= beta={self.beta}")

    def moments(self, mean, variance):
        mean, variance = _as_input(mean, variance)
        alpha, beta = self.alpha, self.beta
        sig = np.sqrt(variance)
        pos = sig > 0.0
        safe_sig = np.where(pos, sig, 1.0)
        t = mean / safe_sig
        cdf = ndtr(t)
        tail = safe_sig * _npdf(t)  # sigma^2 * N(0 | mean, sigma^2)
        gamma = mean * mean + variance
        m = alpha * mean + (beta - alpha) * (mean * cdf + tail)
        second = alpha * alpha * gamma + (beta * beta - alpha * alpha) * (
            gamma * cdf + mean * tail
        )
        corr = alpha * gamma + (beta - alpha) * (gamma * cdf + mean * tail)
        v = second - m * m
        c = corr - mean * m
        point = np.maximum(alpha * mean, beta * mean)
        m = np.where(pos, m, point)
        v = np.where(pos, v, 0.0)
        c = np.where(pos, c, 0.0)
        return _finalize(m, v, c, variance)

    def __call__(self, a):
        a = np.asarray(a, dtype=float)
        return np.maximum(self.alpha * a, self.beta * a)

    def spec(self) -> dict:
        return {"name": self.name, "alpha": self.alpha, "beta": self.beta}


def relu() -> PiecewiseLinear:
    return PiecewiseLinear(0.0, 1.0)


def _probit_family_moments(mean, variance, lam):
    """Exact moments of Phi(lam*a) for a ~ N(mean, variance)."""
    t2 = 1.0 + lam * lam * variance
    t = np.sqrt(t2)
    h = lam * mean / t
    m = ndtr(h)
    # E[Phi(lam a)^2] = P(X1 <= lam a, X2 <= lam a) with correlation rho.
    owen_a = 1.0 / np.sqrt(1.0 + 2.0 * lam * lam * variance)
    second = m - 2.0 * owens_t(h, owen_a)
    spread = variance > 0.0
    v = np.where(spread, second - m * m, 0.0)
    c = np.where(spread, variance * lam / t * _npdf(h), 0.0)
    return m, v, c


@dataclass(frozen=True)
class Sigmoid(Activation):
    """Sigmoid as the probit surrogate Phi(lambda*a), lambda = sqrt(pi/8)."""

    name = "sigmoid"
    bounded_output = True

    def moments(self, mean, variance):
        mean, variance = _as_input(mean, variance)
        m, v, c = _probit_family_moments(mean, variance, _LAMBDA)
        return _finalize(m, v, c, variance)

    def __call__(self, a):
        return ndtr(_LAMBDA * np.asarray(a, dtype=float))


@dataclass(frozen=True)
class Probit(Activation):
    name = "probit"
    bounded_output = True

    def moments(self, mean, variance):
        mean, variance = _as_input(mean, variance)
        m, v, c = _probit_family_moments(mean, variance, 1.0)
        return _finalize(m, v, c, variance)

    def __call__(self, a):
        return ndtr(np.asarray(a, dtype=float))


@dataclass(frozen=True)
class Tanh(Activation):
    """tanh via the affine identity tanh(a) = 2*s(2a) - 1 applied to the
    sigmoid surrogate; Cov(a, 2 s(2a) - 1) = Cov(2a, s(2a))."""

    name = "tanh"

    def moments(self, mean, variance):
        mean, variance = _as_input(mean, variance)
        m, v, c = _probit_family_moments(2.0 * mean, 4.0 * variance, _LAMBDA)
        return _finalize(2.0 * m - 1.0, 4.0 * v, c, variance)

    def __call__(self, a):
        return 2.0 * ndtr(2.0 * _LAMBDA * np.asarray(a, dtype=float)) - 1.0


@dataclass(frozen=True)
class Heaviside(Activation):
    """Step function 1{a > 0}; moments are exact Gaussian integrals."""

    name = "heaviside"
    bounded_output = True

    def moments(self, mean, variance):
        mean, variance = _as_input(mean, variance)
        sig = np.sqrt(variance)
        pos = sig > 0.0
        safe_sig = np.where(pos, sig, 1.0)
        t = mean / safe_sig
        m = ndtr(t)
        v = m * (1.0 - m)
        c = safe_sig * _npdf(t)
        m = np.where(pos, m, (mean > 0.0).astype(float))
        v = np.where(pos, v, 0.0)
        c = np.where(pos, c, 0.0)
        return _finalize(m, v, c, variance)

    def __call__(self, a):
        return (np.asarray(a, dtype=float) > 0.0).astype(float)


def propagate(activation: Activation, g: ScalarGaussian) -> ActivationMoments:
    """Moments of activation(a) for a single scalar Gaussian input."""
    m, v, c = activation.moments(g.mean, g.variance)
    return ActivationMoments(float(m), float(v), float(c))


_SIMPLE = {
    "linear": Linear,
    "sigmoid": Sigmoid,
    "tanh": Tanh,
    "probit": Probit,
    "heaviside": Heaviside,
}


def activation_from_name(token: str) -> Activation:
    """Parse an activation token: one of linear/relu/sigmoid/tanh/probit/
    heaviside, or ``pwl:<alpha>:<beta>``."""
    token = token.strip().lower()
    if token in _SIMPLE:
        return _SIMPLE[token]()
    if token == "relu":
        return relu()
    if token.startswith("pwl:"):
        parts = token.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected pwl:<alpha>:<beta>, got {token!r}")
        return PiecewiseLinear(float(parts[1]), float(parts[2]))
    raise ValueError(f"unknown activation {token!r}")


def activation_from_spec(spec: dict) -> Activation:
    name = spec.get("name")
    if name == "piecewise_linear":
        return PiecewiseLinear(float(spec["alpha"]), float(spec["beta"]))
    if name in _SIMPLE:
        return _SIMPLE[name]()
    raise ValueError(f"unknown activation spec {spec!r}")
