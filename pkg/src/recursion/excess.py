"""
Excess Losses

The excess loss f = loss(h) - gamma * loss(h') of a posterior draw h against a
recorded prior draw h' takes values in {-gamma, 0, 1 - gamma, 1}, and its three
threshold indicators are what the split-kl bound controls.

Examples:
    >>> excess_value(0, 1, 0.5)
    -0.5
    >>> excess_indicators(1, 1, ExcessSupport(0.5)).indicators
    (1, 1, 0)
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from src.bounds.concentration import BinaryDecomposition, DiscreteSupport, binarify, indicator_matrix
from src.hypotheses.base import EstimationMode, HypothesisDistribution, HypothesisError
from src.ingestion.datasets import DatasetView

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExcessSupport:
    """Grid {-gamma, 0, 1 - gamma, 1} with gaps (gamma, 1 - gamma, gamma)."""
    gamma: float

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise HypothesisError(f"gamma must lie in (0, 1) (got {self.gamma})")

    @property
    def support(self) -> DiscreteSupport:
        return DiscreteSupport((-self.gamma, 0.0, 1.0 - self.gamma, 1.0))

    @property
    def alphas(self) -> np.ndarray:
        return self.support.gaps


def excess_value(h_loss: int, prior_loss: int, gamma: float) -> float:
    """h_loss - gamma * prior_loss."""
    return float(h_loss - gamma * prior_loss)


def excess_indicators(h_loss: int, prior_loss: int, support: ExcessSupport) -> BinaryDecomposition:
    """Threshold indicators of the excess value on its four-point grid."""
    return binarify(excess_value(h_loss, prior_loss, support.gamma), support.support)


@dataclass
class TripletSet:
    """
    Points of a validation view, each with the 0-1 loss of one prior draw h'_i.

    The triple (X_i, Y_i, h'_i) is represented by the view (index and payload) and
    the recorded loss of h'_i, the only property of h'_i the bounds need.
    """
    view: DatasetView
    prior_losses: np.ndarray
    prior_seed: int

    def __post_init__(self):
        self.prior_losses = np.asarray(self.prior_losses, dtype=np.int8)
        if self.prior_losses.shape != (len(self.view),):
            raise HypothesisError(
                f"Expected {len(self.view)} prior losses, got shape {self.prior_losses.shape}"
            )

    def __len__(self) -> int:
        return len(self.view)

    @property
    def indices(self) -> np.ndarray:
        return self.view.indices

    def subset(self, positions: np.ndarray) -> 'TripletSet':
        positions = np.asarray(positions, dtype=np.int64)
        return TripletSet(self.view.subset(positions), self.prior_losses[positions], self.prior_seed)


def build_triplets(points: DatasetView, prior: HypothesisDistribution, seed: int) -> TripletSet:
    """
    Draw one prior hypothesis per point and record its zero-one loss.

    The draw of a point depends only on (seed, global index), so repeated calls and
    overlapping views agree.
    """
    if len(points) == 0:
        return TripletSet(points, np.zeros(0, dtype=np.int8), seed)
    return TripletSet(points, prior.point_losses(points, seed), seed)


@dataclass(frozen=True)
class ExcessEstimate:
    """Empirical means of the three excess indicators."""
    means: np.ndarray
    F_hat: float
    m: int

    def to_dict(self) -> Dict[str, Any]:
        return {'means': self.means.tolist(), 'F_hat': self.F_hat, 'm': self.m}


def excess_indicator_means(
    posterior: HypothesisDistribution,
    view: DatasetView,
    reference_losses: np.ndarray,
    gamma: float,
    grid: DiscreteSupport,
    mode: EstimationMode,
    seed: int = 0
) -> np.ndarray:
    """
    Means of the threshold indicators of loss(h) - gamma * reference_loss over a view.

    Exact mode averages over the posterior in closed form (finite backend); sampled
    mode draws one posterior hypothesis per point.
    """
    if len(view) == 0:
        raise HypothesisError("Cannot estimate excess means on an empty sample")
    reference = np.asarray(reference_losses, dtype=float)
    if mode == 'exact':
        if not posterior.is_finite:
            raise HypothesisError("Exact excess means require a finite hypothesis class")
        losses = posterior.hclass.loss_matrix(view).astype(float)
        indicators = indicator_matrix(losses - gamma * reference[None, :], grid)
        means = posterior.weights @ indicators.mean(axis=1)
    elif mode == 'sampled':
        losses = posterior.point_losses(view, seed).astype(float)
        means = indicator_matrix(losses - gamma * reference, grid).mean(axis=0)
    else:
        raise HypothesisError(f"Unknown estimation mode: {mode}")
    return np.clip(means, 0.0, 1.0)


def estimate_excess_means(
    posterior: HypothesisDistribution,
    triplets: TripletSet,
    support: ExcessSupport,
    mode: EstimationMode,
    seed: int = 0
) -> ExcessEstimate:
    """
    Empirical indicator means of the excess loss of `posterior` on a triplet set.

    Args:
        posterior: Posterior distribution
        triplets: Points with recorded prior-draw losses
        support: Excess grid for gamma
        mode: "exact" (finite backend, expectation over the posterior) or "sampled"
            (one posterior draw per triplet)
        seed: Seed of the posterior draws in sampled mode

    Returns:
        ExcessEstimate with F_hat = -gamma + sum_j alpha_j * mean_j and m = len(triplets)

    Raises:
        HypothesisError: On an empty triplet set or exact mode on a non-finite backend
    """
    grid = support.support
    means = excess_indicator_means(
        posterior, triplets.view, triplets.prior_losses, support.gamma, grid, mode, seed
    )
    F_hat = float(grid.low + means @ grid.gaps)
    return ExcessEstimate(means=means, F_hat=F_hat, m=len(triplets))
