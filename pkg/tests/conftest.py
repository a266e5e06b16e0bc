"""Shared fixtures: small threshold samples, priors and optimizer settings."""

import numpy as np
import pytest

from src.hypotheses.finite import CategoricalDistribution, FiniteHypothesisClass
from src.hypotheses.network import GaussianNetworkDistribution, NetworkShape
from src.hypotheses.training import TrainConfig
from src.ingestion.datasets import Dataset
from src.ingestion.synthetic import ThresholdDistribution, gen_threshold_data


@pytest.fixture
def threshold_data():
    return gen_threshold_data(ThresholdDistribution(theta_star=0.5, eta=0.1), 400, seed=7)


@pytest.fixture
def threshold_class():
    return FiniteHypothesisClass.uniform_thresholds(21)


@pytest.fixture
def uniform_prior(threshold_class):
    return CategoricalDistribution.uniform(threshold_class)


@pytest.fixture
def fast_cfg():
    return TrainConfig(learning_rate=1.0, momentum=0.5, epochs=20, seed=3)


@pytest.fixture
def blob_data():
    """Two Gaussian blobs in two dimensions."""
    rng = np.random.default_rng(11)
    y = rng.integers(0, 2, size=60)
    X = rng.normal(0.0, 0.5, size=(60, 2)) + np.where(y[:, None] == 1, 1.0, -1.0)
    return Dataset(features=X, labels=y, n_classes=2, provenance="blobs")


@pytest.fixture
def network_prior():
    return GaussianNetworkDistribution.init_prior(NetworkShape((2, 4, 2)), sigma0=0.05, seed=5)
