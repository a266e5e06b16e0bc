"""Tests for hypothesis backends, surrogates and objective gradients."""

import math

import numpy as np
import pytest

from src.bounds.concentration import DiscreteSupport
from src.hypotheses.base import HypothesisError, empirical_gibbs_loss, sample_hypothesis
from src.hypotheses.finite import CategoricalDistribution, FiniteHypothesisClass, categorical_kl
from src.hypotheses.network import (
    GaussianNetworkDistribution,
    NetworkShape,
    backward,
    forward,
    gaussian_kl_terms,
)
from src.hypotheses.objectives import (
    categorical_excess_objective,
    categorical_gibbs_objective,
    surrogate_excess_objective,
    surrogate_gibbs_objective,
)
from src.hypotheses.surrogates import (
    SurrogateConfig,
    bounded_cross_entropy,
    sigmoid_indicator,
    sigmoid_indicator_grad,
)

EXCESS_SUPPORT = DiscreteSupport((-0.5, 0.0, 0.5, 1.0))


def numeric_gradient(f, x, h=1e-6):
    grad = np.zeros_like(x)
    for i in range(len(x)):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (f(x + step) - f(x - step)) / (2.0 * h)
    return grad


def assert_gradient_matches(objective, x, tol=1e-4):
    analytic = objective(x)[1]
    numeric = numeric_gradient(lambda z: objective(z)[0], x)
    error = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-12)
    assert error < tol, f"relative gradient error {error:.2e}"


@pytest.fixture
def perturbed_params(network_prior):
    rng = np.random.default_rng(0)
    P = network_prior.shape.n_params
    return np.concatenate([
        network_prior.mean + 0.1 * rng.standard_normal(P),
        network_prior.log_sigma + 0.2 * rng.standard_normal(P),
    ])


class TestSurrogates:

    def test_sigmoid_indicator(self):
        assert sigmoid_indicator(1.0, 0.0, 5.0) == pytest.approx(0.993307, abs=1e-6)
        assert sigmoid_indicator(0.3, 0.3, 5.0) == pytest.approx(0.5)
        assert sigmoid_indicator(-1000.0, 0.0, 5.0) == pytest.approx(0.0, abs=1e-300)

    def test_sigmoid_indicator_grad(self):
        z = np.linspace(-1.0, 1.0, 11)
        numeric = (sigmoid_indicator(z + 1e-6, 0.2, 5.0) - sigmoid_indicator(z - 1e-6, 0.2, 5.0)) / 2e-6
        np.testing.assert_allclose(sigmoid_indicator_grad(z, 0.2, 5.0), numeric, rtol=1e-6)

    @pytest.mark.parametrize("z0", [-0.5, 0.0, 0.5])
    def test_sigmoid_indicator_hardens(self, z0):
        z = z0 + np.array([-1.0, -0.1, -0.01, 0.01, 0.1, 1.0])
        hard = (z >= z0).astype(float)
        np.testing.assert_allclose(sigmoid_indicator(z, z0, 1e4), hard, atol=1e-30)
        gaps = [np.abs(sigmoid_indicator(z, z0, c1) - hard).max() for c1 in (10.0, 1e2, 1e3, 1e4)]
        assert np.all(np.diff(gaps) < 0.0)

    def test_uniform_logits(self):
        cfg = SurrogateConfig(k=10, p_min=1e-5)
        values = bounded_cross_entropy(np.zeros((3, 10)), np.array([0, 4, 9]), cfg)
        np.testing.assert_allclose(values, 1.0 / 6.0, rtol=1e-12)

    def test_range(self):
        cfg = SurrogateConfig(k=3)
        rng = np.random.default_rng(1)
        logits = rng.normal(0.0, 10.0, size=(200, 3))
        values = bounded_cross_entropy(logits, rng.integers(0, 3, 200), cfg)
        assert np.all(values > 0.0)
        assert np.all(values <= 1.0 + 1e-12)

    def test_gradient(self):
        cfg = SurrogateConfig(k=3)
        rng = np.random.default_rng(2)
        logits = rng.normal(size=(4, 3))
        y = np.array([0, 1, 2, 1])
        _, grad = bounded_cross_entropy(logits, y, cfg, with_grad=True)
        flat = logits.ravel()
        numeric = numeric_gradient(lambda z: bounded_cross_entropy(z.reshape(4, 3), y, cfg).sum(), flat)
        np.testing.assert_allclose(grad.ravel(), numeric, atol=1e-7)

    def test_invalid_config(self):
        with pytest.raises(HypothesisError):
            SurrogateConfig(k=1)
        with pytest.raises(HypothesisError):
            SurrogateConfig(k=2, p_min=0.0)
        with pytest.raises(HypothesisError):
            bounded_cross_entropy(np.zeros((2, 3)), np.array([0, 1]), SurrogateConfig(k=2))


class TestNetworkBackend:

    def test_param_count(self):
        assert NetworkShape((2, 4, 2)).n_params == 22
        assert NetworkShape((784, 100, 10)).n_params == 79510

    def test_backward_matches_finite_differences(self, network_prior, blob_data):
        X = blob_data.features[:8]
        weights = np.random.default_rng(3).normal(size=(8, 2))
        shape = network_prior.shape

        def f(params):
            logits, cache = forward(shape, params, X)
            return float(np.sum(logits * weights)), backward(shape, params, cache, weights)

        assert_gradient_matches(f, network_prior.mean.copy())

    def test_kl_closed_form(self, network_prior):
        P = network_prior.shape.n_params
        kl, dmean, dlog = gaussian_kl_terms(network_prior.mean, network_prior.log_sigma,
                                            network_prior.mean, network_prior.log_sigma)
        assert kl == 0.0
        np.testing.assert_array_equal(dmean, np.zeros(P))
        np.testing.assert_array_equal(dlog, np.zeros(P))

        shifted = GaussianNetworkDistribution(network_prior.shape, network_prior.mean + 0.1,
                                              network_prior.log_sigma)
        expected = P * 0.01 / (2.0 * 0.05 ** 2)
        assert shifted.kl(network_prior) == pytest.approx(expected, rel=1e-10)

        wider = GaussianNetworkDistribution(network_prior.shape, network_prior.mean,
                                            network_prior.log_sigma + math.log(2.0))
        assert wider.kl(network_prior) == pytest.approx(P * (-math.log(2.0) + 2.0 - 0.5), rel=1e-10)

    def test_kl_across_backends(self, network_prior, uniform_prior):
        with pytest.raises(HypothesisError):
            network_prior.kl(uniform_prior)
        other = GaussianNetworkDistribution.init_prior(NetworkShape((2, 3, 2)), sigma0=0.05)
        with pytest.raises(HypothesisError):
            network_prior.kl(other)

    def test_point_draws_keyed_by_global_index(self, network_prior, blob_data):
        view = blob_data.view()
        positions = np.array([5, 17, 3, 40])
        full = network_prior.point_losses(view, seed=9)
        part = network_prior.point_losses(view.subset(positions), seed=9)
        np.testing.assert_array_equal(part, full[positions])

    def test_vanishing_noise_gives_mean_network(self, network_prior, blob_data):
        sharp = GaussianNetworkDistribution(network_prior.shape, network_prior.mean,
                                            np.full(network_prior.shape.n_params, -40.0))
        view = blob_data.view()
        np.testing.assert_allclose(sharp.point_logits(view, seed=1),
                                   sharp.mean_network().logits(view.X), atol=1e-12)

    def test_exact_mode_rejected(self, network_prior, blob_data):
        with pytest.raises(HypothesisError):
            empirical_gibbs_loss(network_prior, blob_data.view(), 'exact')

    def test_dict_round_trip(self, network_prior):
        loaded = GaussianNetworkDistribution.from_dict(network_prior.to_dict())
        assert loaded.shape == network_prior.shape
        np.testing.assert_array_equal(loaded.mean, network_prior.mean)
        assert loaded.lineage == network_prior.lineage
        with pytest.raises(HypothesisError):
            GaussianNetworkDistribution.from_dict({'kind': 'categorical'})

    def test_prior_means_truncated(self):
        prior = GaussianNetworkDistribution.init_prior(NetworkShape((16, 8, 3)), sigma0=0.03, seed=1)
        W1, b1 = prior.shape.unpack(prior.mean)[0]
        assert np.all(np.abs(W1) <= 2.0 / math.sqrt(16))
        np.testing.assert_array_equal(b1, np.zeros(8))
        np.testing.assert_allclose(prior.sigma, 0.03)


class TestNetworkObjectives:

    def test_gibbs_gradient(self, network_prior, blob_data, perturbed_params):
        cfg = SurrogateConfig(k=2)
        X, y = blob_data.features[:12], blob_data.labels[:12]
        noise = np.random.default_rng(4).standard_normal(network_prior.shape.n_params)
        assert_gradient_matches(
            lambda p: surrogate_gibbs_objective(p, network_prior, X, y, noise, 60, 0.025, 2, cfg),
            perturbed_params,
        )

    def test_excess_gradient(self, network_prior, blob_data, perturbed_params):
        cfg = SurrogateConfig(k=2)
        X, y = blob_data.features[:12], blob_data.labels[:12]
        reference = np.random.default_rng(5).integers(0, 2, 12)
        noise = np.random.default_rng(6).standard_normal(network_prior.shape.n_params)
        assert_gradient_matches(
            lambda p: surrogate_excess_objective(p, network_prior, X, y, reference, noise, 0.5,
                                                 EXCESS_SUPPORT, 30, 0.025, 2, cfg),
            perturbed_params,
        )

    def test_rejects_wrong_shapes(self, network_prior, blob_data):
        cfg = SurrogateConfig(k=2)
        P = network_prior.shape.n_params
        with pytest.raises(HypothesisError):
            surrogate_gibbs_objective(np.zeros(P), network_prior, blob_data.features, blob_data.labels,
                                      np.zeros(P), 60, 0.025, 1, cfg)


class TestCategoricalBackend:

    def test_kl(self, threshold_class, uniform_prior):
        point = CategoricalDistribution.point_mass(threshold_class, 4)
        assert categorical_kl(point, uniform_prior) == pytest.approx(math.log(21))
        assert categorical_kl(uniform_prior, uniform_prior) == 0.0
        assert categorical_kl(uniform_prior, point) == math.inf

    def test_invalid_weights(self, threshold_class):
        with pytest.raises(HypothesisError):
            CategoricalDistribution(threshold_class, np.full(21, 0.1))
        with pytest.raises(HypothesisError):
            CategoricalDistribution(threshold_class, np.ones(3) / 3)

    def test_exact_gibbs_loss_is_weighted_risk(self, threshold_class, threshold_data):
        rng = np.random.default_rng(7)
        rho = CategoricalDistribution.from_logits(threshold_class, rng.normal(size=21))
        view = threshold_data.view()
        expected = rho.weights @ threshold_class.loss_matrix(view).mean(axis=1)
        assert empirical_gibbs_loss(rho, view, 'exact')[0] == pytest.approx(expected, abs=1e-12)

    def test_sampled_draws_keyed_by_global_index(self, uniform_prior, threshold_data):
        view = threshold_data.view()
        positions = np.arange(100, 200)
        full = uniform_prior.draw_indices(view, seed=3)
        np.testing.assert_array_equal(uniform_prior.draw_indices(view.subset(positions), seed=3),
                                      full[positions])

    def test_sampled_mean_near_exact(self, uniform_prior, threshold_data):
        view = threshold_data.view()
        exact = empirical_gibbs_loss(uniform_prior, view, 'exact')[0]
        sampled, m = empirical_gibbs_loss(uniform_prior, view, 'sampled', seed=11)
        assert m == len(view)
        assert abs(sampled - exact) < 0.1

    @pytest.mark.parametrize("logits", [np.zeros(21), np.linspace(-1.0, 1.0, 21)])
    def test_sampled_agrees_with_exact_over_seeds(self, threshold_class, threshold_data, logits):
        rho = CategoricalDistribution.from_logits(threshold_class, logits)
        view = threshold_data.view()
        exact = empirical_gibbs_loss(rho, view, 'exact')[0]
        sampled = np.array([empirical_gibbs_loss(rho, view, 'sampled', seed=s)[0] for s in range(100)])
        assert abs(sampled.mean() - exact) < 0.01
        assert np.all(np.abs(sampled - exact) <= math.sqrt(math.log(2.0 / 1e-4) / (2 * len(view))))

    @pytest.mark.parametrize("logits", [np.zeros(21), np.linspace(-3.0, 3.0, 21)])
    def test_sample_hypothesis_frequencies(self, threshold_class, logits):
        rho = CategoricalDistribution.from_logits(threshold_class, logits)
        rng = np.random.default_rng(0)
        position = {theta: k for k, theta in enumerate(threshold_class.thresholds)}
        draws = 100_000
        counts = np.zeros(21)
        for _ in range(draws):
            counts[position[sample_hypothesis(rho, rng).theta]] += 1
        frequencies = counts / draws
        tolerance = 5.0 * np.sqrt(rho.weights * (1.0 - rho.weights) / draws) + 1e-9
        assert np.all(np.abs(frequencies - rho.weights) <= tolerance)

    def test_dict_round_trip(self, threshold_class):
        rho = CategoricalDistribution.point_mass(threshold_class, 7)
        loaded = CategoricalDistribution.from_dict(rho.to_dict())
        np.testing.assert_array_equal(loaded.weights, rho.weights)
        np.testing.assert_allclose(loaded.hclass.thresholds, threshold_class.thresholds)


class TestCategoricalObjectives:

    def test_gibbs_gradient(self, uniform_prior, threshold_data):
        losses = uniform_prior.hclass.loss_matrix(threshold_data.view())
        logits = np.random.default_rng(8).normal(size=21)
        assert_gradient_matches(
            lambda z: categorical_gibbs_objective(z, uniform_prior, losses, 400, 0.025, 3),
            logits,
        )

    def test_excess_gradient(self, uniform_prior, threshold_data):
        view = threshold_data.view()
        losses = uniform_prior.hclass.loss_matrix(view)
        reference = uniform_prior.point_losses(view, seed=2)
        logits = np.random.default_rng(9).normal(size=21)
        assert_gradient_matches(
            lambda z: categorical_excess_objective(z, uniform_prior, losses, reference, 0.5,
                                                   EXCESS_SUPPORT, 400, 0.025, 3),
            logits,
        )

    def test_objective_dominates_empirical_loss(self, uniform_prior, threshold_data):
        losses = uniform_prior.hclass.loss_matrix(threshold_data.view())
        value, _ = categorical_gibbs_objective(np.zeros(21), uniform_prior, losses, 400, 0.025, 1)
        assert value > losses.mean()

    def test_prior_needs_full_support(self, threshold_class, threshold_data):
        point = CategoricalDistribution.point_mass(threshold_class, 0)
        losses = threshold_class.loss_matrix(threshold_data.view())
        with pytest.raises(HypothesisError):
            categorical_gibbs_objective(np.zeros(21), point, losses, 400, 0.025, 1)


def test_finite_class_needs_hypotheses():
    with pytest.raises(HypothesisError):
        FiniteHypothesisClass([])
