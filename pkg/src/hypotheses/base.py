"""
Hypothesis Distributions

Common interface of the two backends (finite categorical, Gaussian network),
zero-one loss and the empirical Gibbs loss E_rho[L_hat(h, S)].

A randomized (Gibbs) classifier draws a fresh hypothesis for every prediction.
In "sampled" mode every data point gets its own independent draw; in "exact" mode
the expectation over the distribution is taken in closed form, which only the
finite backend supports.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, Literal, Protocol, Tuple

import numpy as np

from src.ingestion.datasets import DatasetView

logger = logging.getLogger(__name__)

EstimationMode = Literal['exact', 'sampled']


class HypothesisError(ValueError):
    """Raised for shape mismatches and unsupported backend operations."""
    pass


class Classifier(Protocol):
    """A deterministic prediction rule."""

    def predict(self, X: np.ndarray) -> np.ndarray:
        ...


def zero_one_loss(h: Classifier, x: np.ndarray, y: int) -> int:
    """
    Zero-one loss 1[h(x) != y] of a single example.

    Examples:
        >>> zero_one_loss(ThresholdRule(0.5), np.array([0.7]), 1)
        0
    """
    x = np.asarray(x, dtype=float)
    prediction = h.predict(x[None, :] if x.ndim == 1 else x)
    return int(prediction[0] != y)


def zero_one_losses(h: Classifier, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vector of per-point zero-one losses."""
    return (h.predict(X) != np.asarray(y)).astype(np.int8)


class HypothesisDistribution(ABC):
    """Prior or posterior over classifiers."""

    is_finite: bool = False

    @abstractmethod
    def kl(self, prior: 'HypothesisDistribution') -> float:
        """KL(self || prior)."""

    @abstractmethod
    def sample_hypothesis(self, rng: np.random.Generator) -> Classifier:
        """One draw h ~ self."""

    @abstractmethod
    def point_losses(self, view: DatasetView, seed: int) -> np.ndarray:
        """
        Zero-one loss of an independent draw h_i ~ self on every point of the view.

        The draw for a point depends only on (seed, global index of the point).
        """

    def expected_point_losses(self, view: DatasetView) -> np.ndarray:
        """E_{h ~ self}[loss of h on each point]; exact mode only."""
        raise HypothesisError(f"{type(self).__name__} does not support exact expectations")

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """Checkpoint payload."""


def empirical_gibbs_loss(
    dist: HypothesisDistribution,
    view: DatasetView,
    mode: EstimationMode,
    seed: int = 0
) -> Tuple[float, int]:
    """
    Empirical Gibbs loss of a distribution on a view.

    Args:
        dist: Hypothesis distribution
        view: Evaluation points
        mode: "exact" (finite backend) or "sampled" (one draw per point)
        seed: Seed of the per-point draws in sampled mode

    Returns:
        (mean loss, m) with m the number of draws behind a sampled mean

    Raises:
        HypothesisError: If exact mode is requested on a non-finite backend
    """
    if len(view) == 0:
        raise HypothesisError("Cannot evaluate a Gibbs loss on an empty view")
    if mode == 'exact':
        if not dist.is_finite:
            raise HypothesisError("Exact Gibbs loss requires a finite hypothesis class")
        return float(np.mean(dist.expected_point_losses(view))), len(view)
    if mode == 'sampled':
        return float(np.mean(dist.point_losses(view, seed))), len(view)
    raise HypothesisError(f"Unknown estimation mode: {mode}")


def sample_hypothesis(dist: HypothesisDistribution, rng: np.random.Generator) -> Classifier:
    """One draw h ~ dist from the given generator."""
    return dist.sample_hypothesis(rng)
