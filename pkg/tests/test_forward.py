import numpy as np
import pytest

from kbnn import (
    LayerState,
    Linear,
    PriorSpec,
    Sigmoid,
    Standardizer,
    forward,
    init_network,
    layer_forward,
    relu,
)
from kbnn.forward import augment, forward_standardized

class TestLayerForward:
    def test_deterministic_hand_example(self):
        # x=[1,2] augmented, weight mean [0,1,2], covariance I3, linear
        layer = LayerState(np.array([[0.0, 1.0, 2.0]]), np.eye(3)[None], Linear())
        rec = layer_forward(layer, np.array([1.0, 1.0, 2.0]), np.zeros(3),
                            deterministic_input=True)
        assert rec.preact_mean[0] == pytest.approx(5.0)
        assert rec.preact_var[0] == pytest.approx(6.0)
        assert rec.out_mean[0] == pytest.approx(5.0)
        assert rec.out_var[0] == pytest.approx(6.0)

    def test_degenerate_gaussians(self):
        layer = LayerState(np.array([[0.5, -1.0]]), np.zeros((1, 2, 2)), Linear())
        rec = layer_forward(layer, np.array([1.0, 3.0]), np.zeros(2))
        assert rec.preact_mean[0] == pytest.approx(0.5 - 3.0)
        assert rec.out_var[0] <= 1e-9  # floored zero

    def test_uncertain_input_hand_example(self):
        layer = LayerState(np.array([[0.0, 1.0, 2.0]]),
                           np.diag([0.0, 1.0, 1.0])[None], Linear())
        rec = layer_forward(layer, np.array([1.0, 1.0, 3.0]),
                            np.array([0.0, 1.0, 1.0]))
        # quad terms 5 + 10 + trace 2 = 17
        assert rec.preact_mean[0] == pytest.approx(7.0)
        assert rec.preact_var[0] == pytest.approx(17.0)

    def test_dimension_errors(self):
        layer = LayerState(np.zeros((2, 3)), np.tile(np.eye(3), (2, 1, 1)), Linear())
        with pytest.raises(ValueError):
            layer_forward(layer, np.ones(4), np.zeros(4))
        with pytest.raises(ValueError, match="constant 1"):
            layer_forward(layer, np.array([2.0, 0.0, 0.0]), np.zeros(3))


class TestForward:
    def test_deterministic_network_reduces_to_mlp(self, rng):
        # zero covariances: the mean must match a conventional MLP using the
        # same pointwise activations (sigmoid = probit surrogate)
        acts = [relu(), Sigmoid(), Linear()]
        net = init_network([3, 8, 5, 2], acts, seed=0)
        for layer in net.layers:
            layer.weight_cov[:] = 0.0
        x = rng.normal(size=3)
        pred, _ = forward(net, x)
        h = x.copy()
        for layer, act in zip(net.layers, acts):
            h = act(layer.weight_mean @ augment(h))
        np.testing.assert_allclose(pred.mean, h, atol=1e-12)
        assert np.all(pred.variance <= 1e-8)

    def test_single_layer_prior_prediction(self):
        # weight prior N(0, I), x=[1]: mean 0, variance [1,1] I [1,1]^T = 2
        net = init_network([1, 1], [Linear()], PriorSpec(1.0), seed=0)
        net.layers[0].weight_mean[:] = 0.0
        pred, _ = forward(net, np.array([1.0]))
        assert pred.mean[0] == pytest.approx(0.0)
        assert pred.variance[0] == pytest.approx(2.0)

    def test_monotone_variance_in_weight_covariance(self, rng):
        net = init_network([2, 6, 1], [relu(), Linear()], seed=3)
        x = rng.normal(size=2)
        base, _ = forward(net, x)
        scaled = net.copy()
        for layer in scaled.layers:
            layer.weight_cov *= 3.0
        bigger, _ = forward(scaled, x)
        assert np.all(bigger.variance >= base.variance - 1e-12)

    def test_mc_consistency_two_layer_relu(self, rng):
        # weight-sampling MC of the predictive moments; ReLU hidden + linear
        # output makes the propagated moments exact, so 4 SE must cover
        net = init_network([2, 6, 1], [relu(), Linear()], PriorSpec(0.5), seed=9)
        x = rng.normal(size=2)
        pred, _ = forward(net, x)
        n = 100_000
        outs = np.empty(n)
        l1, l2 = net.layers
        z_aug = augment(x)
        chol1 = np.linalg.cholesky(l1.weight_cov)
        chol2 = np.linalg.cholesky(l2.weight_cov[0])
        draws1 = l1.weight_mean[None] + np.einsum(
            "nij,snj->sni", chol1, rng.standard_normal((n, 6, 3)))
        draws2 = l2.weight_mean[0][None] + rng.standard_normal((n, 7)) @ chol2.T
        hidden = np.maximum(draws1 @ z_aug, 0.0)
        hidden_aug = np.concatenate([np.ones((n, 1)), hidden], axis=1)
        outs = np.einsum("si,si->s", hidden_aug, draws2)
        se_mean = outs.std() / np.sqrt(n)
        centered = outs - outs.mean()
        mc_var = np.mean(centered ** 2)
        se_var = np.sqrt((np.mean(centered ** 4) - mc_var ** 2) / n)
        assert abs(pred.mean[0] - outs.mean()) <= 4 * se_mean
        assert abs(pred.variance[0] - mc_var) <= 4 * se_var

    def test_standardizer_round_trip(self):
        std = Standardizer(np.array([2.0]), np.array([4.0]),
                           np.array([10.0]), np.array([5.0]))
        net = init_network([1, 1], [Linear()], seed=0, standardizer=std)
        net.layers[0].weight_mean[:] = np.array([[0.0, 1.0]])
        net.layers[0].weight_cov[:] = 0.0
        pred, _ = forward(net, np.array([6.0]))
        # standardized input (6-2)/4 = 1 -> model output 1 -> 10 + 5*1
        assert pred.mean[0] == pytest.approx(15.0)
        # model variance 0 (floored) scales by 25
        assert pred.variance[0] == pytest.approx(25e-9, abs=1e-8)

    def test_cache_matches_layer_count(self):
        net = init_network([2, 4, 3, 1], [relu(), relu(), Linear()], seed=1)
        _, cache = forward(net, np.zeros(2))
        assert len(cache.records) == 3
        assert cache.records[0].deterministic_input
        assert not cache.records[1].deterministic_input

    def test_input_shape_error(self):
        net = init_network([2, 1], [Linear()], seed=0)
        with pytest.raises(ValueError):
            forward_standardized(net, np.zeros(3))

    def test_extrapolation_variance_grows(self):
        # trained on [-4, 4]: predictive variance far outside the range must
        # exceed the in-range average
        from kbnn import CubicSpec, TrainConfig, gen_cubic, train
        split = gen_cubic(CubicSpec(n=400), seed=0)
        net = init_network([1, 30, 1], [relu(), Linear()], seed=0)
        net, _ = train(net, split, TrainConfig(epochs=1, seed=0))
        inside = np.linspace(-4.0, 4.0, 33)
        in_vars = [forward(net, np.array([v]))[0].variance[0] for v in inside]
        far_var = forward(net, np.array([12.0]))[0].variance[0]
        assert far_var > np.mean(in_vars)
