"""
Bound-Minimizing Trainers

Stochastic gradient descent with momentum on the relaxed bound objectives:

- train_gibbs_posterior / train_pi1: PAC-Bayes-kl objective against a fixed prior
- train_excess_posterior / train_pit: PAC-Bayes-split-kl objective on the excess loss
- erm_train: a deterministic empirical risk minimizer (reference classifier h*)

Gaussian network posteriors are trained by mini-batches with one reparameterized
parameter draw per batch. Categorical posteriors are trained full-batch on exact
0-1 losses through a softmax parameterization; there one "epoch" is one step.

All trainers are deterministic given TrainConfig.seed.

Examples:
    >>> cfg = TrainConfig(learning_rate=0.5, momentum=0.9, epochs=50, seed=1)
    >>> rho = train_pi1(pi0, schedule_view, n_total=1000, budget=budget, T=4, cfg=cfg)
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

try:
    from tqdm import tqdm
    HAS_TQDM = True
except ImportError:
    HAS_TQDM = False
    logging.warning("tqdm not installed, progress bars disabled")

from src.bounds.concentration import DiscreteSupport
from src.bounds.pacbayes import ConfidenceBudget
from src.config import settings
from src.hypotheses.base import Classifier, HypothesisDistribution, HypothesisError
from src.hypotheses.finite import CategoricalDistribution
from src.hypotheses.network import DeterministicNetwork, GaussianNetworkDistribution, backward, forward
from src.hypotheses.objectives import (
    categorical_excess_objective,
    categorical_gibbs_objective,
    surrogate_excess_objective,
    surrogate_gibbs_objective,
)
from src.hypotheses.surrogates import SurrogateConfig, bounded_cross_entropy
from src.ingestion.datasets import DatasetView

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer settings."""
    learning_rate: float = settings.LEARNING_RATE
    momentum: float = settings.MOMENTUM
    batch_size: int = settings.BATCH_SIZE
    epochs: int = settings.EPOCHS
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0.0:
            raise HypothesisError(f"learning_rate must be positive (got {self.learning_rate})")
        if not 0.0 <= self.momentum < 1.0:
            raise HypothesisError(f"momentum must lie in [0, 1) (got {self.momentum})")
        if self.batch_size < 1:
            raise HypothesisError(f"batch_size must be positive (got {self.batch_size})")
        if self.epochs < 0:
            raise HypothesisError(f"epochs must be non-negative (got {self.epochs})")


class SGDMomentum:
    """v <- momentum * v + grad; params <- params - learning_rate * v."""

    def __init__(self, learning_rate: float, momentum: float):
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.velocity: Optional[np.ndarray] = None

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.velocity is None:
            self.velocity = np.zeros_like(params)
        self.velocity = self.momentum * self.velocity + grad
        return params - self.learning_rate * self.velocity


def _epochs(cfg: TrainConfig, desc: str):
    if HAS_TQDM and cfg.epochs > 1:
        return tqdm(range(cfg.epochs), desc=desc, leave=False, disable=not settings.DEBUG)
    return range(cfg.epochs)


def _batches(n: int, cfg: TrainConfig, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, cfg.batch_size):
        yield order[start:start + cfg.batch_size]


def _check_view(view: DatasetView, what: str):
    if len(view) == 0:
        raise HypothesisError(f"Cannot train {what} on an empty sample")


def _train_categorical(prior, init, objective, cfg, history, lineage):
    """
    Full-batch descent on the logits of a categorical posterior.

    Both categorical objectives are smooth in the logits, so with momentum 0 and a
    small enough learning rate the recorded history is non-increasing. With momentum
    the iterates may overshoot and only the overall trend is downward.
    """
    if cfg.epochs == 0:
        return CategoricalDistribution(prior.hclass, init.weights.copy(), lineage)
    z = np.log(np.maximum(init.weights, np.finfo(float).tiny))
    optimizer = SGDMomentum(cfg.learning_rate, cfg.momentum)
    for _ in range(cfg.epochs):
        value, grad = objective(z)
        if history is not None:
            history.append(value)
        z = optimizer.step(z, grad)
    return CategoricalDistribution.from_logits(prior.hclass, z, lineage)


def _train_network(prior, init, view, objective, cfg, history, lineage, desc):
    rng = np.random.default_rng(cfg.seed)
    params = np.concatenate([init.mean, init.log_sigma])
    optimizer = SGDMomentum(cfg.learning_rate, cfg.momentum)
    X, y = view.X, view.y
    for epoch in _epochs(cfg, desc):
        values = []
        for batch in _batches(len(view), cfg, rng):
            noise = rng.standard_normal(prior.shape.n_params)
            value, grad = objective(params, X[batch], y[batch], batch, noise)
            values.append(value)
            params = optimizer.step(params, grad)
        if history is not None:
            history.append(float(np.mean(values)))
        logger.debug(f"{desc} epoch {epoch + 1}/{cfg.epochs}: objective {np.mean(values):.6f}")
    P = prior.shape.n_params
    return GaussianNetworkDistribution(prior.shape, params[:P], params[P:], lineage)


def train_gibbs_posterior(
    prior: HypothesisDistribution,
    view: DatasetView,
    n_effective: int,
    delta: float,
    union_factor: int,
    cfg: TrainConfig,
    surrogate: Optional[SurrogateConfig] = None,
    init: Optional[HypothesisDistribution] = None,
    history: Optional[List[float]] = None
) -> HypothesisDistribution:
    """
    Minimize the relaxed PAC-Bayes-kl bound of a posterior against `prior`.

    Args:
        prior: Prior distribution (KL reference)
        view: Training points
        n_effective: Sample size of the bound the posterior will be certified with
        delta: Confidence parameter
        union_factor: Number of applications sharing delta
        cfg: Optimizer settings
        surrogate: Surrogate parameters (network backend)
        init: Starting point (defaults to the prior)
        history: If given, receives the objective value of every epoch

    Returns:
        Trained posterior of the prior's backend
    """
    _check_view(view, "a posterior")
    init = prior if init is None else init
    lineage = {'trainer_seed': cfg.seed, 'epochs': cfg.epochs, 'objective': 'gibbs'}

    if isinstance(prior, CategoricalDistribution):
        losses = prior.hclass.loss_matrix(view)
        return _train_categorical(
            prior, init,
            lambda z: categorical_gibbs_objective(z, prior, losses, n_effective, delta, union_factor),
            cfg, history, lineage,
        )
    if isinstance(prior, GaussianNetworkDistribution):
        surrogate = surrogate or SurrogateConfig(k=prior.shape.n_classes)
        return _train_network(
            prior, init, view,
            lambda params, X, y, batch, noise: surrogate_gibbs_objective(
                params, prior, X, y, noise, n_effective, delta, union_factor, surrogate),
            cfg, history, lineage, "gibbs",
        )
    raise HypothesisError(f"Unsupported backend: {type(prior).__name__}")


def train_excess_posterior(
    prior: HypothesisDistribution,
    view: DatasetView,
    reference_losses: np.ndarray,
    n_effective: int,
    gamma: float,
    support: DiscreteSupport,
    delta: float,
    union_factor: int,
    cfg: TrainConfig,
    surrogate: Optional[SurrogateConfig] = None,
    history: Optional[List[float]] = None
) -> HypothesisDistribution:
    """
    Minimize the relaxed PAC-Bayes-split-kl bound of loss - gamma * reference_loss.

    Args:
        prior: Prior distribution, also the starting point
        view: Training points
        reference_losses: Reference 0-1 loss of every point of the view
        n_effective: Sample size of the bound (may exceed len(view))
        gamma: Scale of the reference loss
        support: Value grid of the excess loss
        delta: Confidence parameter
        union_factor: Number of applications sharing delta
        cfg: Optimizer settings
        surrogate: Surrogate parameters (network backend)
        history: If given, receives the objective value of every epoch
    """
    _check_view(view, "an excess posterior")
    reference_losses = np.asarray(reference_losses, dtype=float)
    if reference_losses.shape != (len(view),):
        raise HypothesisError(
            f"Expected {len(view)} reference losses, got shape {reference_losses.shape}"
        )
    lineage = {'trainer_seed': cfg.seed, 'epochs': cfg.epochs, 'objective': 'excess', 'gamma': gamma}

    if isinstance(prior, CategoricalDistribution):
        losses = prior.hclass.loss_matrix(view)
        return _train_categorical(
            prior, prior,
            lambda z: categorical_excess_objective(
                z, prior, losses, reference_losses, gamma, support, n_effective, delta, union_factor),
            cfg, history, lineage,
        )
    if isinstance(prior, GaussianNetworkDistribution):
        surrogate = surrogate or SurrogateConfig(k=prior.shape.n_classes)
        return _train_network(
            prior, prior, view,
            lambda params, X, y, batch, noise: surrogate_excess_objective(
                params, prior, X, y, reference_losses[batch], noise, gamma, support,
                n_effective, delta, union_factor, surrogate),
            cfg, history, lineage, "excess",
        )
    raise HypothesisError(f"Unsupported backend: {type(prior).__name__}")


def train_pi1(
    pi0: HypothesisDistribution,
    s1: DatasetView,
    n_total: int,
    budget: ConfidenceBudget,
    T: int,
    cfg: TrainConfig,
    surrogate: Optional[SurrogateConfig] = None,
    history: Optional[List[float]] = None
) -> HypothesisDistribution:
    """First posterior of a T-step recursion: trained on S_1, certified on all n_total points."""
    return train_gibbs_posterior(pi0, s1, n_total, budget.delta, T, cfg, surrogate, history=history)


def train_pit(
    pi_prev: HypothesisDistribution,
    triplets,
    n_val: int,
    gamma: float,
    budget: ConfidenceBudget,
    T: int,
    cfg: TrainConfig,
    surrogate: Optional[SurrogateConfig] = None,
    history: Optional[List[float]] = None
) -> HypothesisDistribution:
    """
    Later posterior of a recursion: trained on the triplets of S_t, certified on n_val points.

    Args:
        triplets: Triplet set over S_t (anything exposing `view` and `prior_losses`)
    """
    support = DiscreteSupport((-gamma, 0.0, 1.0 - gamma, 1.0))
    return train_excess_posterior(
        pi_prev, triplets.view, triplets.prior_losses, n_val, gamma, support,
        budget.delta, T, cfg, surrogate, history,
    )


def erm_train(
    view: DatasetView,
    model: HypothesisDistribution,
    cfg: TrainConfig,
    surrogate: Optional[SurrogateConfig] = None
) -> Classifier:
    """
    Deterministic empirical risk minimizer.

    Finite classes return the hypothesis of least empirical 0-1 loss (lowest index on
    ties); networks train the mean network of `model` on bounded cross-entropy.
    """
    _check_view(view, "an ERM classifier")
    if isinstance(model, CategoricalDistribution):
        losses = model.hclass.loss_matrix(view).mean(axis=1)
        return model.hclass[int(np.argmin(losses))]
    if not isinstance(model, GaussianNetworkDistribution):
        raise HypothesisError(f"Unsupported backend: {type(model).__name__}")

    surrogate = surrogate or SurrogateConfig(k=model.shape.n_classes)
    rng = np.random.default_rng(cfg.seed)
    params = model.mean.copy()
    optimizer = SGDMomentum(cfg.learning_rate, cfg.momentum)
    X, y = view.X, view.y
    for _ in _epochs(cfg, "erm"):
        for batch in _batches(len(view), cfg, rng):
            logits, cache = forward(model.shape, params, X[batch])
            _, dlogits = bounded_cross_entropy(logits, y[batch], surrogate, with_grad=True)
            params = optimizer.step(params, backward(model.shape, params, cache, dlogits / len(batch)))
    return DeterministicNetwork(model.shape, params)
