"""
RPB Hypotheses Module

Hypothesis distributions, surrogate losses, bound objectives and trainers.
"""

from .base import (
    HypothesisError,
    HypothesisDistribution,
    zero_one_loss,
    zero_one_losses,
    empirical_gibbs_loss,
    sample_hypothesis,
)
from .finite import (
    ThresholdRule,
    FiniteHypothesisClass,
    CategoricalDistribution,
    categorical_kl,
)
from .network import (
    NetworkShape,
    DeterministicNetwork,
    GaussianNetworkDistribution,
    gaussian_kl,
)
from .surrogates import (
    SurrogateConfig,
    sigmoid_indicator,
    bounded_cross_entropy,
)
from .objectives import (
    surrogate_gibbs_objective,
    surrogate_excess_objective,
    categorical_gibbs_objective,
    categorical_excess_objective,
)
from .training import (
    TrainConfig,
    SGDMomentum,
    train_gibbs_posterior,
    train_excess_posterior,
    train_pi1,
    train_pit,
    erm_train,
)

__all__ = [
    'HypothesisError',
    'HypothesisDistribution',
    'zero_one_loss',
    'zero_one_losses',
    'empirical_gibbs_loss',
    'ThresholdRule',
    'FiniteHypothesisClass',
    'CategoricalDistribution',
    'categorical_kl',
    'NetworkShape',
    'DeterministicNetwork',
    'GaussianNetworkDistribution',
    'gaussian_kl',
    'SurrogateConfig',
    'sigmoid_indicator',
    'bounded_cross_entropy',
    'surrogate_gibbs_objective',
    'surrogate_excess_objective',
    'categorical_gibbs_objective',
    'categorical_excess_objective',
    'TrainConfig',
    'SGDMomentum',
    'train_gibbs_posterior',
    'train_excess_posterior',
    'train_pi1',
    'train_pit',
    'erm_train',
    'sample_hypothesis',
]
