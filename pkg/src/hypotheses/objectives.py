"""
Training Objectives

McAllester-relaxed bound objectives with analytic gradients, for both backends:

    gibbs:  E_rho[loss] + sqrt((KL(rho||pi) + ln(2 u sqrt(n) / delta)) / (2n))
    excess: sum_j alpha_j * (E_rho[f_j] + sqrt((KL + ln(2 K u sqrt(n) / delta)) / (2n)))

where f_j are the threshold indicators of the excess loss f = loss - gamma * reference_loss
on the support b_0 < ... < b_K. n is the bound's sample size, which may exceed the
batch the empirical terms are averaged over.

Network objectives take the flat vector (mean, log_sigma) and one explicit noise draw
eps (parameters w = mean + sigma * eps), so a call is a deterministic function of its
arguments. Categorical objectives take softmax logits and use exact 0-1 losses.
"""

import math
from typing import Tuple

import numpy as np

from src.bounds.concentration import DiscreteSupport
from src.bounds.pacbayes import log_term
from src.config import settings
from src.hypotheses.base import HypothesisError
from src.hypotheses.finite import CategoricalDistribution
from src.hypotheses.network import GaussianNetworkDistribution, backward, forward, gaussian_kl_terms
from src.hypotheses.surrogates import SurrogateConfig, bounded_cross_entropy, sigmoid_indicator

Objective = Tuple[float, np.ndarray]


def _complexity(kl: float, log_c: float, n: int) -> Tuple[float, float]:
    """sqrt((KL + log_c) / (2n)) and its derivative in KL."""
    value = math.sqrt((kl + log_c) / (2.0 * n))
    return value, 1.0 / (4.0 * n * value)


def _split_params(params: np.ndarray, prior: GaussianNetworkDistribution) -> Tuple[np.ndarray, np.ndarray]:
    params = np.asarray(params, dtype=float)
    P = prior.shape.n_params
    if params.shape != (2 * P,):
        raise HypothesisError(f"Expected {2 * P} parameters (mean, log_sigma), got shape {params.shape}")
    return params[:P], params[P:]


def _network_surrogate(params, prior, X, y, noise, cfg):
    """Per-point bounded cross-entropy of w = mean + sigma * noise, with a backprop closure."""
    mean, log_sigma = _split_params(params, prior)
    noise = np.asarray(noise, dtype=float)
    if noise.shape != mean.shape:
        raise HypothesisError(f"Noise shape {noise.shape} does not match {mean.shape}")
    sigma = np.exp(log_sigma)
    w = mean + sigma * noise
    logits, cache = forward(prior.shape, w, X)
    values, dlogits = bounded_cross_entropy(logits, y, cfg, with_grad=True)

    def pullback(weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        grad_w = backward(prior.shape, w, cache, weights[:, None] * dlogits)
        return grad_w, grad_w * noise * sigma

    return mean, log_sigma, values, pullback


def surrogate_gibbs_objective(
    params: np.ndarray,
    prior: GaussianNetworkDistribution,
    X: np.ndarray,
    y: np.ndarray,
    noise: np.ndarray,
    n_effective: int,
    delta: float,
    union_factor: int,
    cfg: SurrogateConfig
) -> Objective:
    """
    Relaxed PAC-Bayes-kl objective of a Gaussian network posterior.

    Returns:
        (objective, gradient w.r.t. params)
    """
    mean, log_sigma, values, pullback = _network_surrogate(params, prior, X, y, noise, cfg)
    kl, dkl_mean, dkl_log_sigma = gaussian_kl_terms(mean, log_sigma, prior.mean, prior.log_sigma)
    complexity, dc_dkl = _complexity(kl, log_term(n_effective, delta, union_factor), n_effective)

    batch = len(values)
    grad_mean, grad_log_sigma = pullback(np.full(batch, 1.0 / batch))
    grad = np.concatenate([grad_mean + dc_dkl * dkl_mean, grad_log_sigma + dc_dkl * dkl_log_sigma])
    return float(values.mean() + complexity), grad


def surrogate_excess_objective(
    params: np.ndarray,
    prior: GaussianNetworkDistribution,
    X: np.ndarray,
    y: np.ndarray,
    reference_losses: np.ndarray,
    noise: np.ndarray,
    gamma: float,
    support: DiscreteSupport,
    n_effective: int,
    delta: float,
    union_factor: int,
    cfg: SurrogateConfig
) -> Objective:
    """
    Relaxed PAC-Bayes-split-kl objective of the excess loss of a Gaussian network posterior.

    The smoothed excess is bounded_cross_entropy - gamma * reference_loss; each of
    its K indicators is smoothed by sigmoid_indicator with sharpness cfg.c1.

    Returns:
        (objective, gradient w.r.t. params)
    """
    mean, log_sigma, values, pullback = _network_surrogate(params, prior, X, y, noise, cfg)
    reference = np.asarray(reference_losses, dtype=float)
    if reference.shape != values.shape:
        raise HypothesisError(f"Expected {len(values)} reference losses, got shape {reference.shape}")

    excess = values - gamma * reference
    thresholds = np.asarray(support.points[1:])
    smoothed = sigmoid_indicator(excess[:, None], thresholds[None, :], cfg.c1)
    alphas = support.gaps

    kl, dkl_mean, dkl_log_sigma = gaussian_kl_terms(mean, log_sigma, prior.mean, prior.log_sigma)
    complexity, dc_dkl = _complexity(kl, log_term(n_effective, delta, support.K * union_factor), n_effective)
    total_alpha = float(alphas.sum())

    batch = len(values)
    slopes = cfg.c1 * smoothed * (1.0 - smoothed)
    grad_mean, grad_log_sigma = pullback(slopes @ alphas / batch)
    grad = np.concatenate([
        grad_mean + total_alpha * dc_dkl * dkl_mean,
        grad_log_sigma + total_alpha * dc_dkl * dkl_log_sigma,
    ])
    objective = float(smoothed.mean(axis=0) @ alphas + total_alpha * complexity)
    return objective, grad


def _softmax_with_kl(logits: np.ndarray, prior: CategoricalDistribution):
    z = np.asarray(logits, dtype=float)
    if z.shape != prior.weights.shape:
        raise HypothesisError(f"Expected {len(prior.weights)} logits, got shape {z.shape}")
    if np.any(prior.weights <= 0.0):
        raise HypothesisError("Categorical training needs a prior with full support")
    w = np.exp(z - z.max())
    w /= w.sum()
    log_ratio = np.log(w) - np.log(prior.weights)
    return w, log_ratio, max(float(w @ log_ratio), 0.0)


def _softmax_pullback(w: np.ndarray, g: np.ndarray) -> np.ndarray:
    return w * (g - w @ g)


def categorical_gibbs_objective(
    logits: np.ndarray,
    prior: CategoricalDistribution,
    losses: np.ndarray,
    n_effective: int,
    delta: float,
    union_factor: int
) -> Objective:
    """
    Relaxed PAC-Bayes-kl objective of softmax(logits) with exact 0-1 losses.

    Args:
        losses: (M, B) zero-one losses of every hypothesis on the training points
    """
    w, log_ratio, kl = _softmax_with_kl(logits, prior)
    per_hypothesis = np.asarray(losses, dtype=float).mean(axis=1)
    complexity, dc_dkl = _complexity(kl, log_term(n_effective, delta, union_factor), n_effective)
    g = per_hypothesis + dc_dkl * (log_ratio + 1.0)
    return float(w @ per_hypothesis + complexity), _softmax_pullback(w, g)


def categorical_excess_objective(
    logits: np.ndarray,
    prior: CategoricalDistribution,
    losses: np.ndarray,
    reference_losses: np.ndarray,
    gamma: float,
    support: DiscreteSupport,
    n_effective: int,
    delta: float,
    union_factor: int
) -> Objective:
    """
    Relaxed PAC-Bayes-split-kl objective of softmax(logits) on the exact excess indicators.

    Args:
        losses: (M, B) zero-one losses of every hypothesis
        reference_losses: (B,) reference (prior-draw) losses of the same points
    """
    w, log_ratio, kl = _softmax_with_kl(logits, prior)
    losses = np.asarray(losses, dtype=float)
    excess = losses - gamma * np.asarray(reference_losses, dtype=float)[None, :]
    indicators = excess[:, :, None] >= np.asarray(support.points[1:])[None, None, :] - settings.SUPPORT_TOL
    component_means = indicators.mean(axis=1)
    alphas = support.gaps
    per_hypothesis = component_means @ alphas

    complexity, dc_dkl = _complexity(kl, log_term(n_effective, delta, support.K * union_factor), n_effective)
    total_alpha = float(alphas.sum())
    g = per_hypothesis + total_alpha * dc_dkl * (log_ratio + 1.0)
    return float(w @ per_hypothesis + total_alpha * complexity), _softmax_pullback(w, g)
