"""Tests for the optimizer loop, bound-minimizing trainers and ERM."""

import numpy as np
import pytest

from src.bounds.concentration import DiscreteSupport
from src.bounds.pacbayes import ConfidenceBudget
from src.hypotheses.base import HypothesisError, zero_one_losses
from src.hypotheses.finite import CategoricalDistribution
from src.hypotheses.network import GaussianNetworkDistribution
from src.hypotheses.training import (
    SGDMomentum,
    TrainConfig,
    erm_train,
    train_excess_posterior,
    train_gibbs_posterior,
    train_pi1,
    train_pit,
)
from src.ingestion.synthetic import ThresholdDistribution, gen_threshold_data
from src.recursion.excess import build_triplets


def test_sgd_momentum():
    optimizer = SGDMomentum(learning_rate=0.1, momentum=0.9)
    params = optimizer.step(np.array([1.0, 2.0]), np.array([1.0, -1.0]))
    np.testing.assert_allclose(params, [0.9, 2.1])
    params = optimizer.step(params, np.array([1.0, -1.0]))
    np.testing.assert_allclose(params, [0.9 - 0.19, 2.1 + 0.19])


@pytest.mark.parametrize("kwargs", [
    {'learning_rate': 0.0},
    {'momentum': 1.0},
    {'batch_size': 0},
    {'epochs': -1},
])
def test_invalid_train_config(kwargs):
    with pytest.raises(HypothesisError):
        TrainConfig(**kwargs)


class TestCategoricalTraining:

    def test_objective_decreases(self, uniform_prior, threshold_data, fast_cfg):
        history = []
        rho = train_gibbs_posterior(uniform_prior, threshold_data.view(), 400, 0.025, 1, fast_cfg,
                                    history=history)
        assert len(history) == fast_cfg.epochs
        assert history[-1] < history[0]
        assert rho.kl(uniform_prior) > 0.0

    @pytest.mark.parametrize("objective", ['gibbs', 'excess'])
    def test_monotone_without_momentum(self, uniform_prior, threshold_data, objective):
        cfg = TrainConfig(learning_rate=0.1, momentum=0.0, epochs=50)
        view = threshold_data.view()
        history = []
        if objective == 'gibbs':
            train_gibbs_posterior(uniform_prior, view, 400, 0.025, 1, cfg, history=history)
        else:
            reference = uniform_prior.point_losses(view, seed=1)
            train_excess_posterior(uniform_prior, view, reference, 400, 0.5,
                                   DiscreteSupport((-0.5, 0.0, 0.5, 1.0)), 0.025, 1, cfg, history=history)
        assert len(history) == 50
        assert np.all(np.diff(history) <= 1e-12)
        assert history[-1] < history[0]

    def test_posterior_moves_toward_true_threshold(self, uniform_prior, threshold_data):
        cfg = TrainConfig(learning_rate=10.0, momentum=0.9, epochs=100)
        rho = train_gibbs_posterior(uniform_prior, threshold_data.view(), 400, 0.025, 1, cfg)
        thresholds = uniform_prior.hclass.thresholds
        assert abs(thresholds[np.argmax(rho.weights)] - 0.5) <= 0.15
        assert rho.weights.max() > uniform_prior.weights.max()

    def test_zero_epochs_returns_prior(self, uniform_prior, threshold_data):
        rho = train_gibbs_posterior(uniform_prior, threshold_data.view(), 400, 0.025, 1, TrainConfig(epochs=0))
        np.testing.assert_array_equal(rho.weights, uniform_prior.weights)
        assert rho is not uniform_prior
        assert rho.kl(uniform_prior) == 0.0

    def test_excess_training(self, uniform_prior, threshold_data, fast_cfg):
        view = threshold_data.view()
        reference = uniform_prior.point_losses(view, seed=1)
        history = []
        rho = train_excess_posterior(uniform_prior, view, reference, 400, 0.5,
                                     DiscreteSupport((-0.5, 0.0, 0.5, 1.0)), 0.025, 1, fast_cfg,
                                     history=history)
        assert isinstance(rho, CategoricalDistribution)
        assert history[-1] < history[0]

    def test_reference_length_checked(self, uniform_prior, threshold_data, fast_cfg):
        with pytest.raises(HypothesisError):
            train_excess_posterior(uniform_prior, threshold_data.view(), np.zeros(3), 400, 0.5,
                                   DiscreteSupport((-0.5, 0.0, 0.5, 1.0)), 0.025, 1, fast_cfg)

    def test_empty_view_rejected(self, uniform_prior, threshold_data, fast_cfg):
        empty = threshold_data.view(np.array([], dtype=np.int64))
        with pytest.raises(HypothesisError):
            train_gibbs_posterior(uniform_prior, empty, 1, 0.025, 1, fast_cfg)

    def test_recursion_steps(self, uniform_prior, threshold_data, fast_cfg):
        budget = ConfidenceBudget.for_recursion(2)
        view = threshold_data.view()
        pi1 = train_pi1(uniform_prior, view.subset(np.arange(200)), 400, budget, 2, fast_cfg)
        triplets = build_triplets(view.subset(np.arange(200, 400)), pi1, seed=5)
        pi2 = train_pit(pi1, triplets, 200, 0.5, budget, 2, fast_cfg)
        assert isinstance(pi2, CategoricalDistribution)
        assert pi2.lineage['gamma'] == 0.5
        assert pi2.lineage['objective'] == 'excess'


class TestNetworkTraining:

    def test_deterministic(self, network_prior, blob_data):
        cfg = TrainConfig(learning_rate=0.05, momentum=0.9, batch_size=16, epochs=3, seed=8)
        a = train_gibbs_posterior(network_prior, blob_data.view(), 60, 0.025, 1, cfg)
        b = train_gibbs_posterior(network_prior, blob_data.view(), 60, 0.025, 1, cfg)
        assert isinstance(a, GaussianNetworkDistribution)
        np.testing.assert_array_equal(a.mean, b.mean)
        np.testing.assert_array_equal(a.log_sigma, b.log_sigma)

    def test_history_per_epoch(self, network_prior, blob_data):
        history = []
        cfg = TrainConfig(learning_rate=0.05, momentum=0.9, batch_size=16, epochs=4, seed=1)
        rho = train_gibbs_posterior(network_prior, blob_data.view(), 60, 0.025, 1, cfg, history=history)
        assert len(history) == 4
        assert all(np.isfinite(history))
        assert not np.array_equal(rho.mean, network_prior.mean)

    def test_erm_network_fits_blobs(self, network_prior, blob_data):
        cfg = TrainConfig(learning_rate=0.5, momentum=0.9, batch_size=20, epochs=50, seed=0)
        h = erm_train(blob_data.view(), network_prior, cfg)
        assert zero_one_losses(h, blob_data.features, blob_data.labels).mean() < 0.2


def test_erm_finite_class_separable(threshold_class):
    data = gen_threshold_data(ThresholdDistribution(theta_star=0.5, eta=0.0), 200, seed=1)
    h = erm_train(data.view(), CategoricalDistribution.uniform(threshold_class), TrainConfig())
    assert zero_one_losses(h, data.features, data.labels).sum() == 0
