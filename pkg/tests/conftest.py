"""Shared oracles and helpers.

Everything here is deliberately independent of the library's own moment
formulas: Monte Carlo sampling, kink-split adaptive quadrature, conjugate
Gaussian conditioning, and a literal dense implementation of the joint
smoothing update.
"""
import warnings

import numpy as np
import pytest
from scipy.integrate import IntegrationWarning, quad

from kbnn import LayerState, NetworkState, spd_solve
from kbnn.backward import cross_covariance
from kbnn.forward import layer_forward


# ---------------------------------------------------------------------------
# Monte Carlo oracle for activation moments


def mc_moments(f, mean, var, n=1_000_000, rng=None, base=None):
    """MC estimates of (E[f(a)], Var[f(a)], Cov(a, f(a))) with standard
    errors, for a ~ N(mean, var). ``base`` reuses standard-normal draws."""
    if base is None:
        base = (rng or np.random.default_rng(0)).standard_normal(n)
    a = mean + np.sqrt(var) * base
    fa = f(a)
    m = fa.mean()
    centered = fa - m
    v = centered.dot(centered) / n
    ac = a - a.mean()
    prod = ac * centered
    c = prod.mean()
    c2 = centered * centered
    m4 = c2.dot(c2) / n
    se_m = np.sqrt(v / n)
    se_v = np.sqrt(max(m4 - v * v, 0.0) / n)
    se_c = np.sqrt(max(prod.dot(prod) / n - c * c, 0.0) / n)
    return (m, v, c), (se_m, se_v, se_c)


# ---------------------------------------------------------------------------
# quadrature oracle for piece-wise linear moments (split at the kink)


def quad_pwl_moments(alpha, beta, mean, var):
    sigma = np.sqrt(var)
    pdf = lambda a: np.exp(-0.5 * ((a - mean) / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
    f = lambda a: max(alpha * a, beta * a)
    lo, hi = mean - 14 * sigma, mean + 14 * sigma
    points = [0.0] if lo < 0.0 < hi else None
    opts = dict(points=points, limit=300, epsabs=1e-14, epsrel=1e-13)
    with warnings.catch_warnings():
        # near-zero integrals trip the roundoff heuristic; accuracy is
        # asserted by the tests themselves
        warnings.simplefilter("ignore", IntegrationWarning)
        m = quad(lambda a: f(a) * pdf(a), lo, hi, **opts)[0]
        e2 = quad(lambda a: f(a) ** 2 * pdf(a), lo, hi, **opts)[0]
        eaf = quad(lambda a: a * f(a) * pdf(a), lo, hi, **opts)[0]
    return m, e2 - m * m, eaf - mean * m


# ---------------------------------------------------------------------------
# conjugate Gaussian conditioning oracles (noiseless observations)


def blr_recursive(mean0, cov0, xs_aug, ys):
    """Sequential exact conditioning of w on y_i = x_i^T w."""
    mean, cov = mean0.copy(), cov0.copy()
    for x, y in zip(xs_aug, ys):
        s = float(x @ cov @ x)
        k = cov @ x / s
        mean = mean + k * (y - x @ mean)
        cov = cov - np.outer(k, x @ cov)
        cov = 0.5 * (cov + cov.T)
    return mean, cov


def blr_batch(mean0, cov0, xs_aug, ys):
    """Joint exact conditioning on all observations at once."""
    x = np.asarray(xs_aug, dtype=float)
    y = np.asarray(ys, dtype=float)
    s = x @ cov0 @ x.T
    gain = cov0 @ x.T @ np.linalg.inv(s)
    mean = mean0 + gain @ (y - x @ mean0)
    cov = cov0 - gain @ x @ cov0
    return mean, 0.5 * (cov + cov.T)


# ---------------------------------------------------------------------------
# literal dense implementation of the joint weights-and-inputs smoothing


def dense_joint_smoothing(layer, rec, preact_mean_plus, preact_var_plus):
    """Materializes the stacked state [w_1; ...; w_M; z], the full gain, and
    the full joint covariance update. Returns per-neuron means/covs and the
    un-stripped input message."""
    m = layer.n_neurons
    k = layer.fan_in + 1
    mean_s = np.concatenate([layer.weight_mean.ravel(), rec.in_mean])
    dim = m * k + k
    cov_s = np.zeros((dim, dim))
    for n in range(m):
        cov_s[n * k:(n + 1) * k, n * k:(n + 1) * k] = layer.weight_cov[n]
    cov_s[m * k:, m * k:] = np.diag(rec.in_var)
    cwza = cross_covariance(layer, rec)
    gain = spd_solve(np.diag(rec.preact_var), cwza.T).T
    mean_plus = mean_s + gain @ (preact_mean_plus - rec.preact_mean)
    delta = np.diag(preact_var_plus - rec.preact_var)
    cov_plus = cov_s + gain @ delta @ gain.T
    w_means = [mean_plus[n * k:(n + 1) * k] for n in range(m)]
    w_covs = [cov_plus[n * k:(n + 1) * k, n * k:(n + 1) * k] for n in range(m)]
    z_mean = mean_plus[m * k:]
    z_cov = cov_plus[m * k:, m * k:]
    return w_means, w_covs, z_mean, z_cov


# ---------------------------------------------------------------------------
# misc helpers


def random_psd(rng, k, scale=1.0):
    a = rng.normal(size=(k, k))
    return scale * (a @ a.T) / k + 1e-3 * np.eye(k)


def single_linear_layer_net(mean, cov):
    """A 1-layer linear network with the given weight posterior."""
    mean = np.atleast_2d(np.asarray(mean, dtype=float))
    cov = np.asarray(cov, dtype=float)
    if cov.ndim == 2:
        cov = cov[None, :, :]
    from kbnn import Linear
    layer = LayerState(mean, cov, Linear())
    return NetworkState([layer], mean.shape[1] - 1, mean.shape[0])


def forward_record(layer, in_mean, in_var, deterministic=False):
    return layer_forward(layer, np.asarray(in_mean, float),
                         np.asarray(in_var, float), deterministic)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
