"""Model state: per-neuron Gaussian weight posteriors organized into layers.

Each neuron owns a full covariance over its fan_in+1 weights (bias at index
0); neurons are structurally independent of each other, so a layer stores a
stacked (neurons, fan_in+1) mean array and a (neurons, fan_in+1, fan_in+1)
covariance stack and no cross-neuron terms exist anywhere.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .activations import Activation, activation_from_spec
from .exceptions import ModelFormatError
from .standardize import Standardizer

MODEL_FORMAT = "kbnn-model-v1"


@dataclass
class NeuronPosterior:
    """Gaussian posterior over one neuron's weight vector (bias at index 0)."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.covariance = np.asarray(self.covariance, dtype=float)
        k = self.mean.shape[0]
        if self.covariance.shape != (k, k):
            raise ValueError(
                f"covariance shape {self.covariance.shape} does not match mean length {k}"
            )


@dataclass
class LayerState:
    """One layer: stacked neuron posteriors plus the activation.

    ``weight_mean`` has shape (neurons, fan_in+1); ``weight_cov`` has shape
    (neurons, fan_in+1, fan_in+1).
    """

    weight_mean: np.ndarray
    weight_cov: np.ndarray
    activation: Activation

    def __post_init__(self):
        self.weight_mean = np.asarray(self.weight_mean, dtype=float)
        self.weight_cov = np.asarray(self.weight_cov, dtype=float)
        m, k = self.weight_mean.shape
        if self.weight_cov.shape != (m, k, k):
            raise ValueError(
                f"weight_cov shape {self.weight_cov.shape} inconsistent with mean {self.weight_mean.shape}"
            )

    @property
    def n_neurons(self) -> int:
        return self.weight_mean.shape[0]

    @property
    def fan_in(self) -> int:
        return self.weight_mean.shape[1] - 1

    @property
    def neurons(self) -> list[NeuronPosterior]:
        return [NeuronPosterior(self.weight_mean[i], self.weight_cov[i])
                for i in range(self.n_neurons)]

    def copy(self) -> "LayerState":
        return LayerState(self.weight_mean.copy(), self.weight_cov.copy(), self.activation)


@dataclass
class NetworkState:
    """Full model: layers plus an optional input/output standardizer."""

    layers: list[LayerState]
    input_dim: int
    output_dim: int
    standardizer: Standardizer | None = field(default=None)

    def __post_init__(self):
        fan_in = self.input_dim
        for i, layer in enumerate(self.layers):
            if layer.fan_in != fan_in:
                raise ValueError(
                    f"layer {i} expects fan_in {layer.fan_in}, previous width is {fan_in}"
                )
            fan_in = layer.n_neurons
        if self.layers and self.layers[-1].n_neurons != self.output_dim:
            raise ValueError(
                f"last layer has {self.layers[-1].n_neurons} neurons, output_dim is {self.output_dim}"
            )

    @property
    def arch(self) -> list[int]:
        return [self.input_dim] + [layer.n_neurons for layer in self.layers]

    def with_standardizer(self, standardizer: Standardizer) -> "NetworkState":
        return replace(self, standardizer=standardizer)

    def copy(self) -> "NetworkState":
        return NetworkState([l.copy() for l in self.layers], self.input_dim,
                            self.output_dim, self.standardizer)


@dataclass(frozen=True)
class PriorSpec:
    """Prior over weights: mean ~ N(0, 1/(fan_in+1)) per entry, covariance
    sigma0_sq * I."""

    sigma0_sq: float = 1.0

    def __post_init__(self):
        if self.sigma0_sq <= 0.0:
            raise ValueError("sigma0_sq must be positive")


def init_network(arch, activations, prior: PriorSpec | None = None, seed=0,
                 standardizer: Standardizer | None = None) -> NetworkState:
    """Build a randomly initialized network.

    ``arch`` lists layer widths input-first (e.g. [2, 10, 10, 1]);
    ``activations`` has one entry per layer after the input. The same seed
    always produces a bit-identical state.
    """
    arch = [int(a) for a in arch]
    if len(arch) < 2:
        raise ValueError("arch must contain at least input and output widths")
    if any(a < 1 for a in arch):
        raise ValueError(f"layer widths must be >= 1, got {arch}")
    if len(activations) != len(arch) - 1:
        raise ValueError(
            f"need {len(arch) - 1} activations for arch {arch}, got {len(activations)}"
        )
    prior = prior or PriorSpec()
    rng = np.random.default_rng(seed)
    layers = []
    for l in range(len(arch) - 1):
        k = arch[l] + 1
        m = arch[l + 1]
        mean = rng.normal(0.0, math.sqrt(1.0 / k), size=(m, k))
        cov = np.tile(prior.sigma0_sq * np.eye(k), (m, 1, 1))
        layers.append(LayerState(mean, cov, activations[l]))
    return NetworkState(layers, arch[0], arch[-1], standardizer)


def parameter_count(net: NetworkState) -> int:
    """Number of stored parameters: all means plus all covariance entries."""
    total = 0
    for layer in net.layers:
        m, k = layer.weight_mean.shape
        total += m * k + m * k * k
    return total


def networks_equal(a: NetworkState, b: NetworkState) -> bool:
    if a.arch != b.arch:
        return False
    for la, lb in zip(a.layers, b.layers):
        if la.activation != lb.activation:
            return False
        if not np.array_equal(la.weight_mean, lb.weight_mean):
            return False
        if not np.array_equal(la.weight_cov, lb.weight_cov):
            return False
    if (a.standardizer is None) != (b.standardizer is None):
        return False
    if a.standardizer is not None and a.standardizer != b.standardizer:
        return False
    return True


def save_model(net: NetworkState, path) -> None:
    """Write the model as a versioned JSON document (lossless float repr)."""
    doc = {
        "format": MODEL_FORMAT,
        "arch": net.arch,
        "activations": [layer.activation.spec() for layer in net.layers],
        "standardizer": net.standardizer.spec() if net.standardizer else None,
        "layers": [
            {
                "neurons": [
                    {
                        "mean": layer.weight_mean[i].tolist(),
                        "covariance": layer.weight_cov[i].ravel().tolist(),
                    }
                    for i in range(layer.n_neurons)
                ]
            }
            for layer in net.layers
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def _load_field(doc, key, context):
    if key not in doc:
        raise ModelFormatError(f"{context}: missing field {key!r}")
    return doc[key]


def load_model(path) -> NetworkState:
    """Load a model document; raises ModelFormatError naming the offending
    field on any structural or value problem."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("model document is not an object")
    fmt = _load_field(doc, "format", "document")
    if fmt != MODEL_FORMAT:
        raise ModelFormatError(f"unsupported format {fmt!r}, expected {MODEL_FORMAT!r}")
    arch = _load_field(doc, "arch", "document")
    if not isinstance(arch, list) or len(arch) < 2:
        raise ModelFormatError("field 'arch' must list at least two widths")
    act_specs = _load_field(doc, "activations", "document")
    if len(act_specs) != len(arch) - 1:
        raise ModelFormatError(
            f"field 'activations' has {len(act_specs)} entries, arch needs {len(arch) - 1}"
        )
    try:
        activations = [activation_from_spec(s) for s in act_specs]
    except (ValueError, KeyError, TypeError) as exc:
        raise ModelFormatError(f"field 'activations': {exc}") from exc
    layer_docs = _load_field(doc, "layers", "document")
    if len(layer_docs) != len(arch) - 1:
        raise ModelFormatError(
            f"field 'layers' has {len(layer_docs)} entries, arch needs {len(arch) - 1}"
        )
    layers = []
    for l, layer_doc in enumerate(layer_docs):
        k = int(arch[l]) + 1
        m = int(arch[l + 1])
        neurons = _load_field(layer_doc, "neurons", f"layers[{l}]")
        if len(neurons) != m:
            raise ModelFormatError(
                f"layers[{l}].neurons has {len(neurons)} entries, arch needs {m}"
            )
        mean = np.empty((m, k))
        cov = np.empty((m, k, k))
        for n, ndoc in enumerate(neurons):
            mvec = np.asarray(_load_field(ndoc, "mean", f"layers[{l}].neurons[{n}]"),
                              dtype=float)
            cflat = np.asarray(
                _load_field(ndoc, "covariance", f"layers[{l}].neurons[{n}]"), dtype=float
            )
            if mvec.shape != (k,):
                raise ModelFormatError(
                    f"layers[{l}].neurons[{n}].mean has length {mvec.shape}, expected {k}"
                )
            if cflat.shape != (k * k,):
                raise ModelFormatError(
                    f"layers[{l}].neurons[{n}].covariance has {cflat.size} entries, expected {k * k}"
                )
            cmat = cflat.reshape(k, k)
            diag = np.diagonal(cmat)
            if np.any(diag < 0.0):
                bad = int(np.argmin(diag))
                raise ModelFormatError(
                    f"layers[{l}].neurons[{n}].covariance has negative variance at "
                    f"diagonal index {bad}"
                )
            mean[n] = mvec
            cov[n] = cmat
        layers.append(LayerState(mean, cov, activations[l]))
    std_spec = doc.get("standardizer")
    standardizer = None
    if std_spec is not None:
        try:
            standardizer = Standardizer.from_spec(std_spec)
        except (KeyError, ValueError, TypeError) as exc:
            raise ModelFormatError(f"field 'standardizer': {exc}") from exc
    try:
        return NetworkState(layers, int(arch[0]), int(arch[-1]), standardizer)
    except ValueError as exc:
        raise ModelFormatError(f"inconsistent dimensions: {exc}") from exc
