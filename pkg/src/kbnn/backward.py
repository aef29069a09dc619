"""Weight updates via layer-wise Kalman smoothing.

Processing one (x, y) pair walks the layers backwards, applying two smoothing
steps per layer:

  (I)  update each neuron's pre-activation moments from the smoothed output
       message. The gain is Cov(a, f(a)) / Var(f(a)); since neurons are
       independent the forward output covariance is diagonal, so the gain
       vector has a single nonzero component and only the diagonal of the
       incoming message covariance can contribute.

  (II) jointly update the neuron weights and the layer inputs from the
       smoothed pre-activations. The joint gain columns are built from
       Cov([w; z], a) = [C_w mu_z ; C_z mu_w]; because the pre-activation
       covariance is diagonal and the weight block is block-diagonal per
       neuron, the update decomposes into independent per-neuron rank-1
       corrections plus one dense correction for the layer-input message.

At the output layer the smoothed message is the observation itself (variance
= observation noise, zero by default), which turns step (I) into a Kalman
measurement update.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import UpdateFailedError
from .forward import ForwardCache
from .gaussian import clamp_psd, clamp_psd_stack, symmetrize
from .network import LayerState, NetworkState


@dataclass
class SmoothedLayerMessage:
    """Updated input moments a layer hands to its predecessor (bias
    coordinate already stripped)."""

    mean: np.ndarray
    cov: np.ndarray


def observation_message(y: np.ndarray, observation_noise=0.0) -> SmoothedLayerMessage:
    """Message that anchors the output layer: mean = target, covariance =
    diagonal observation noise (zero for exact conditioning)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    noise = np.asarray(observation_noise, dtype=float)
    if noise.ndim == 0:
        noise = np.full(y.shape[0], float(noise))
    if np.any(noise < 0.0):
        raise ValueError("observation noise must be non-negative")
    return SmoothedLayerMessage(mean=y, cov=np.diag(noise))


def smooth_preactivations(rec, msg: SmoothedLayerMessage):
    """Step (I): per-neuron smoothed pre-activation mean and variance."""
    m = rec.out_mean.shape[0]
    if msg.mean.shape != (m,) or msg.cov.shape != (m, m):
        raise ValueError(
            f"message dims {msg.mean.shape}/{msg.cov.shape} do not match layer width {m}"
        )
    gain = rec.preact_out_cov / rec.out_var
    mean_plus = rec.preact_mean + gain * (msg.mean - rec.out_mean)
    var_plus = rec.preact_var + gain * gain * (np.diagonal(msg.cov) - rec.out_var)
    # >= 0 mathematically (Cauchy-Schwarz caps the gain); clip fp residue.
    # No 1e-9 floor here: this variance never enters a denominator, and
    # flooring it would shift exact-conditioning posteriors off the
    # conjugate-regression reference.
    return mean_plus, np.maximum(var_plus, 0.0)


def cross_covariance(layer: LayerState, rec) -> np.ndarray:
    """Explicit cross-covariance between the stacked [weights; inputs] and the
    pre-activations: upper part block-diagonal with C_w^n mu_z columns, lower
    part columns C_z mu_w^n. Shape (n_neurons*(fan_in+1) + fan_in+1, n_neurons).

    The production update never materializes this matrix; it exists for the
    dense-reference route and direct inspection.
    """
    m = layer.n_neurons
    k = layer.fan_in + 1
    out = np.zeros((m * k + k, m))
    u = np.einsum("nij,j->ni", layer.weight_cov, rec.in_mean)
    for n in range(m):
        out[n * k:(n + 1) * k, n] = u[n]
        out[m * k:, n] = rec.in_var * layer.weight_mean[n]
    return out


def smooth_weights_and_inputs(layer: LayerState, rec, preact_mean_plus,
                              preact_var_plus, need_message: bool = True):
    """Step (II): updated layer posteriors and (optionally) the smoothed
    input message for the preceding layer.

    Returns (new LayerState, SmoothedLayerMessage or None). The weight update
    is per-neuron:

        mean_n  += (dmean_n / var_n) * C_w^n mu_z
        cov_n   += (dvar_n / var_n^2) * (C_w^n mu_z)(C_w^n mu_z)^T

    and the input message accumulates the same corrections through
    C_z mu_w^n. Covariances are floored/PSD-clamped only when needed.
    """
    w_mean, w_cov = layer.weight_mean, layer.weight_cov
    dmean = preact_mean_plus - rec.preact_mean
    dvar = preact_var_plus - rec.preact_var
    scale1 = dmean / rec.preact_var
    scale2 = dvar / (rec.preact_var * rec.preact_var)
    u = np.einsum("nij,j->ni", w_cov, rec.in_mean)
    new_mean = w_mean + scale1[:, None] * u
    new_cov = w_cov + scale2[:, None, None] * (u[:, :, None] * u[:, None, :])
    new_cov = clamp_psd_stack(new_cov)
    new_layer = LayerState(new_mean, new_cov, layer.activation)
    message = None
    if need_message:
        v = w_mean * rec.in_var[None, :]
        mean_full = rec.in_mean + v.T @ scale1
        cov_full = np.diag(rec.in_var) + (v * scale2[:, None]).T @ v
        mean_msg = mean_full[1:]
        cov_msg = clamp_psd(symmetrize(cov_full[1:, 1:]))
        message = SmoothedLayerMessage(mean=mean_msg, cov=cov_msg)
    return new_layer, message


def backward(net: NetworkState, cache: ForwardCache, y, observation_noise=0.0
             ) -> NetworkState:
    """One training update: smooth every layer against the observed output.

    ``y`` is in model space (standardized units when the network carries a
    standardizer; see trainer.update_one for the raw-scale entry point). The
    input state is never mutated; on numeric failure an UpdateFailedError
    annotated with the layer index is raised and the old state stays valid.
    """
    if len(cache.records) != len(net.layers):
        raise ValueError("forward cache does not match network depth")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (net.output_dim,):
        raise ValueError(f"target has shape {y.shape}, network expects ({net.output_dim},)")
    msg = observation_message(y, observation_noise)
    new_layers: list[LayerState] = [None] * len(net.layers)
    for l in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[l]
        rec = cache.records[l]
        try:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                mean_plus, var_plus = smooth_preactivations(rec, msg)
                new_layer, msg = smooth_weights_and_inputs(
                    layer, rec, mean_plus, var_plus, need_message=(l > 0)
                )
        except (np.linalg.LinAlgError, FloatingPointError) as exc:
            raise UpdateFailedError(
                f"numeric failure at layer {l}: {exc}", layer_index=l
            ) from exc
        if not (np.isfinite(new_layer.weight_mean).all()
                and np.isfinite(new_layer.weight_cov).all()):
            raise UpdateFailedError(
                f"non-finite posterior produced at layer {l}", layer_index=l
            )
        if msg is not None and not (np.isfinite(msg.mean).all()
                                    and np.isfinite(msg.cov).all()):
            raise UpdateFailedError(
                f"non-finite smoothed message produced at layer {l}", layer_index=l
            )
        new_layers[l] = new_layer
    return NetworkState(new_layers, net.input_dim, net.output_dim, net.standardizer)
