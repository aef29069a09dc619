"""kbnn: gradient-free online training of Bayesian MLPs via Kalman
filtering (forward moment propagation) and smoothing (weight updates)."""

from .activations import (
    ActivationMoments,
    Heaviside,
    Linear,
    PiecewiseLinear,
    Probit,
    Sigmoid,
    Tanh,
    activation_from_name,
    propagate,
    relu,
)
from .backward import SmoothedLayerMessage, backward, smooth_preactivations
from .datasets import (
    CirclesSpec,
    CubicSpec,
    DatasetSplit,
    MoonsSpec,
    RotatingMoonsSpec,
    gen_circles,
    gen_cubic,
    gen_moons,
    load_csv,
    make_split,
    rotate_moons,
)
from .estimators import KBNNClassifier, KBNNRegressor
from .exceptions import (
    KBNNError,
    ModelFormatError,
    SingularMatrixError,
    UpdateFailedError,
)
from .forward import ForwardCache, Prediction, forward, layer_forward, predict_batch
from .gaussian import (
    VAR_FLOOR,
    GaussianVector,
    ScalarGaussian,
    clamp_psd,
    spd_solve,
    symmetrize,
)
from .metrics import EvalResult, accuracy, avg_nll, evaluate_predictions, rmse
from .network import (
    LayerState,
    NetworkState,
    NeuronPosterior,
    PriorSpec,
    init_network,
    load_model,
    parameter_count,
    save_model,
)
from .standardize import Standardizer
from .trainer import TrainConfig, TrainReport, evaluate_on_split, train, update_one

__version__ = "0.1.0"

__all__ = [
    "ActivationMoments", "Heaviside", "Linear", "PiecewiseLinear", "Probit",
    "Sigmoid", "Tanh", "activation_from_name", "propagate", "relu",
    "SmoothedLayerMessage", "backward", "smooth_preactivations",
    "CirclesSpec", "CubicSpec", "DatasetSplit", "MoonsSpec",
    "RotatingMoonsSpec", "gen_circles", "gen_cubic", "gen_moons", "load_csv",
    "make_split", "rotate_moons",
    "KBNNClassifier", "KBNNRegressor",
    "KBNNError", "ModelFormatError", "SingularMatrixError", "UpdateFailedError",
    "ForwardCache", "Prediction", "forward", "layer_forward", "predict_batch",
    "VAR_FLOOR", "GaussianVector", "ScalarGaussian", "clamp_psd", "spd_solve",
    "symmetrize",
    "EvalResult", "accuracy", "avg_nll", "evaluate_predictions", "rmse",
    "LayerState", "NetworkState", "NeuronPosterior", "PriorSpec",
    "init_network", "load_model", "parameter_count", "save_model",
    "Standardizer",
    "TrainConfig", "TrainReport", "evaluate_on_split", "train", "update_one",
]
