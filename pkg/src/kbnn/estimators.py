"""scikit-learn style estimators wrapping the functional core.

Both estimators follow the usual conventions: hyper-parameters live on
``__init__`` (so ``get_params``/``set_params``/``clone`` work), fitted state
ends in trailing-underscore attributes, and inputs go through the sklearn
validation helpers.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .activations import Linear, Sigmoid, activation_from_name
from .forward import predict_batch
from .network import PriorSpec, init_network
from .standardize import Standardizer
from .trainer import update_one


class _KBNNBase(BaseEstimator):
    def _build(self, n_features, n_outputs, output_activation, standardizer):
        arch = [n_features, *self.hidden_layer_sizes, n_outputs]
        acts = [activation_from_name(self.activation)
                for _ in self.hidden_layer_sizes] + [output_activation]
        seed = 0 if self.random_state is None else int(self.random_state)
        return init_network(arch, acts, PriorSpec(self.prior_variance), seed=seed,
                            standardizer=standardizer)

    def _stream(self, X, y, rng):
        n = X.shape[0]
        order = rng.permutation(n)
        for _ in range(self.epochs):
            for i in order:
                self.network_ = update_one(self.network_, X[i], y[i],
                                           self.observation_noise)
            if self.shuffle_each_epoch:
                order = rng.permutation(n)


class KBNNRegressor(_KBNNBase, RegressorMixin):
    """Bayesian MLP regressor trained by sequential Kalman smoothing.

    Training is gradient-free and online: each ``fit`` epoch streams the data
    once, conditioning the Gaussian weight posterior on one instance at a
    time. ``predict`` returns the predictive mean; with ``return_std=True``
    the predictive standard deviation comes along for free.

    Parameters
    ----------
    hidden_layer_sizes : tuple of int
        Width of each hidden layer.
    activation : str
        Hidden activation: "relu", "linear", "sigmoid", "tanh", "probit",
        "heaviside", or "pwl:<alpha>:<beta>".
    epochs : int
        Passes over the data in ``fit``.
    shuffle_each_epoch : bool
        Reshuffle the stream between epochs (seeded).
    prior_variance : float
        Prior covariance scale of every weight.
    observation_noise : float
        Output anchor variance; 0 conditions on targets exactly.
    standardize : bool
        z-score features and targets on the fit data.
    random_state : int or None
        Seed for initialization and shuffling.
    """

    def __init__(self, hidden_layer_sizes=(50,), activation="relu", epochs=1,
                 shuffle_each_epoch=True, prior_variance=1.0,
                 observation_noise=0.0, standardize=True, random_state=None):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.activation = activation
        self.epochs = epochs
        self.shuffle_each_epoch = shuffle_each_epoch
        self.prior_variance = prior_variance
        self.observation_noise = observation_noise
        self.standardize = standardize
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True)
        y2 = y if y.ndim == 2 else y[:, None]
        if self.standardize:
            standardizer = Standardizer.fit(X, y2)
        else:
            standardizer = Standardizer.identity(X.shape[1], y2.shape[1])
        self.network_ = self._build(X.shape[1], y2.shape[1], Linear(), standardizer)
        self.n_features_in_ = X.shape[1]
        self._y_2d = y.ndim == 2
        seed = 0 if self.random_state is None else int(self.random_state)
        self._stream(X, y2, np.random.default_rng(seed + 1))
        return self

    def partial_fit(self, X, y):
        """Online update on a batch without reinitializing the posterior."""
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True)
        y2 = y if y.ndim == 2 else y[:, None]
        if not hasattr(self, "network_"):
            standardizer = (Standardizer.fit(X, y2) if self.standardize
                            else Standardizer.identity(X.shape[1], y2.shape[1]))
            self.network_ = self._build(X.shape[1], y2.shape[1], Linear(),
                                        standardizer)
            self.n_features_in_ = X.shape[1]
            self._y_2d = y.ndim == 2
        for i in range(X.shape[0]):
            self.network_ = update_one(self.network_, X[i], y2[i],
                                       self.observation_noise)
        return self

    def predict(self, X, return_std=False):
        check_is_fitted(self, "network_")
        X = check_array(X)
        means, variances, _, _ = predict_batch(self.network_, X)
        if not self._y_2d:
            means, variances = means[:, 0], variances[:, 0]
        if return_std:
            return means, np.sqrt(variances)
        return means


class KBNNClassifier(_KBNNBase, ClassifierMixin):
    """Binary Bayesian MLP classifier with a sigmoid output neuron.

    The positive-class probability is the predictive output mean; the
    pre-activation variance (``decision_uncertainty``) keeps growing away
    from the training data and is the better out-of-distribution signal.
    """

    def __init__(self, hidden_layer_sizes=(10, 10), activation="relu", epochs=1,
                 shuffle_each_epoch=True, prior_variance=1.0,
                 observation_noise=0.0, standardize=True, random_state=None):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.activation = activation
        self.epochs = epochs
        self.shuffle_each_epoch = shuffle_each_epoch
        self.prior_variance = prior_variance
        self.observation_noise = observation_noise
        self.standardize = standardize
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_ = np.unique(y)
        if self.classes_.shape[0] != 2:
            raise ValueError(
                f"binary classification only; got {self.classes_.shape[0]} classes"
            )
        y01 = (y == self.classes_[1]).astype(float)[:, None]
        if self.standardize:
            standardizer = Standardizer.fit(X, y01, standardize_targets=False)
        else:
            standardizer = Standardizer.identity(X.shape[1], 1)
        self.network_ = self._build(X.shape[1], 1, Sigmoid(), standardizer)
        self.n_features_in_ = X.shape[1]
        seed = 0 if self.random_state is None else int(self.random_state)
        self._stream(X, y01, np.random.default_rng(seed + 1))
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "network_")
        X = check_array(X)
        means, _, _, _ = predict_batch(self.network_, X)
        p1 = np.clip(means[:, 0], 0.0, 1.0)
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[(proba[:, 1] >= 0.5).astype(int)]

    def decision_uncertainty(self, X):
        """Pre-activation variance of the output neuron (unbounded OOD
        signal, unlike the sigmoid output variance which caps at 1/4)."""
        check_is_fitted(self, "network_")
        X = check_array(X)
        _, _, _, pvars = predict_batch(self.network_, X)
        return pvars[:, 0]
