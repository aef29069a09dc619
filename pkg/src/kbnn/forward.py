"""Layer-wise predictive moment propagation.

For each layer, the pre-activation a = w^T z of every neuron gets a Gaussian
approximation whose mean is mu_w . mu_z and whose variance combines weight
uncertainty, input uncertainty, and their product:

    var(a) = mu_w^T C_z mu_w + mu_z^T C_w mu_z + Tr(C_w C_z)

(exact given independent w and z). Activation moments then produce the
layer's output distribution, and everything is cached for the backward pass.
Input covariances stay diagonal here (neurons are independent), so they are
stored as vectors; the leading bias coordinate carries mean 1 and variance 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import VAR_FLOOR
from .network import LayerState, NetworkState


@dataclass
class LayerForwardRecord:
    """Cached per-layer moments needed by the smoothing pass.

    ``in_mean``/``in_var`` are the augmented layer input (leading 1 with zero
    variance); ``preact_*`` are per-neuron pre-activation moments; ``out_*``
    the per-neuron output moments; ``preact_out_cov`` is Cov(a, f(a)).
    """

    in_mean: np.ndarray
    in_var: np.ndarray
    preact_mean: np.ndarray
    preact_var: np.ndarray
    out_mean: np.ndarray
    out_var: np.ndarray
    preact_out_cov: np.ndarray
    deterministic_input: bool


@dataclass
class ForwardCache:
    """All layer records from one forward evaluation, in layer order."""

    records: list[LayerForwardRecord]


@dataclass
class Prediction:
    """Predictive output distribution (reported in original target units when
    the network carries a standardizer) plus the pre-activation moments of
    the output layer (model units; the out-of-distribution diagnostic)."""

    mean: np.ndarray
    variance: np.ndarray
    pre_activation_mean: np.ndarray
    pre_activation_variance: np.ndarray


def augment(x: np.ndarray) -> np.ndarray:
    """Prepend the constant bias coordinate 1."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.concatenate(([1.0], x))


def layer_forward(layer: LayerState, in_mean: np.ndarray, in_var: np.ndarray,
                  deterministic_input: bool = False) -> LayerForwardRecord:
    """Propagate an (augmented, diagonal) input Gaussian through one layer.

    With ``deterministic_input`` the input is a point and the pre-activation
    variance reduces to the exact prediction-step form x^T C_w x.
    """
    in_mean = np.asarray(in_mean, dtype=float)
    in_var = np.asarray(in_var, dtype=float)
    k = layer.fan_in + 1
    if in_mean.shape != (k,):
        raise ValueError(f"in_mean has shape {in_mean.shape}, layer expects ({k},)")
    if in_var.shape != (k,):
        raise ValueError(f"in_var has shape {in_var.shape}, layer expects ({k},)")
    if in_mean[0] != 1.0:
        raise ValueError("augmented input must lead with the constant 1")
    w_mean, w_cov = layer.weight_mean, layer.weight_cov
    preact_mean = w_mean @ in_mean
    quad_w = np.einsum("i,nij,j->n", in_mean, w_cov, in_mean)
    if deterministic_input:
        preact_var = quad_w
    else:
        quad_z = (w_mean * w_mean) @ in_var
        trace = np.diagonal(w_cov, axis1=1, axis2=2) @ in_var
        preact_var = quad_z + quad_w + trace
    preact_var = np.maximum(preact_var, VAR_FLOOR)
    out_mean, out_var, cross = layer.activation.moments(preact_mean, preact_var)
    out_var = np.maximum(out_var, VAR_FLOOR)
    return LayerForwardRecord(
        in_mean=in_mean,
        in_var=in_var,
        preact_mean=preact_mean,
        preact_var=preact_var,
        out_mean=out_mean,
        out_var=out_var,
        preact_out_cov=cross,
        deterministic_input=deterministic_input,
    )


def forward_standardized(net: NetworkState, x_std: np.ndarray) -> ForwardCache:
    """Forward pass in model space (input already standardized)."""
    x_std = np.atleast_1d(np.asarray(x_std, dtype=float))
    if x_std.shape != (net.input_dim,):
        raise ValueError(f"input has shape {x_std.shape}, network expects ({net.input_dim},)")
    mean = augment(x_std)
    var = np.zeros_like(mean)
    records = []
    for i, layer in enumerate(net.layers):
        rec = layer_forward(layer, mean, var, deterministic_input=(i == 0))
        records.append(rec)
        mean = augment(rec.out_mean)
        var = np.concatenate(([0.0], rec.out_var))
    return ForwardCache(records)


def prediction_from_cache(net: NetworkState, cache: ForwardCache) -> Prediction:
    last = cache.records[-1]
    mean, var = last.out_mean, last.out_var
    if net.standardizer is not None:
        mean = net.standardizer.inverse_targets(mean)
        var = net.standardizer.inverse_target_variance(var)
    return Prediction(
        mean=np.array(mean, dtype=float),
        variance=np.array(var, dtype=float),
        pre_activation_mean=last.preact_mean.copy(),
        pre_activation_variance=last.preact_var.copy(),
    )


def forward(net: NetworkState, x: np.ndarray) -> tuple[Prediction, ForwardCache]:
    """Predictive distribution for a raw-scale input.

    The network standardizer (if any) is applied to ``x`` and the returned
    prediction mean/variance are de-standardized back to original target
    units. The cache stays in model space for the backward pass.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if net.standardizer is not None:
        x = net.standardizer.transform_features(x)
    cache = forward_standardized(net, x)
    return prediction_from_cache(net, cache), cache


def predict_batch(net: NetworkState, xs: np.ndarray):
    """Predictions for a batch of raw-scale rows.

    Returns (means, variances, preact_means, preact_vars) with shape (n, e).
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    n = xs.shape[0]
    e = net.output_dim
    means = np.empty((n, e))
    variances = np.empty((n, e))
    pmeans = np.empty((n, e))
    pvars = np.empty((n, e))
    for i in range(n):
        pred, _ = forward(net, xs[i])
        means[i] = pred.mean
        variances[i] = pred.variance
        pmeans[i] = pred.pre_activation_mean
        pvars[i] = pred.pre_activation_variance
    return means, variances, pmeans, pvars
