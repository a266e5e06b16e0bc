"""
Finite Hypothesis Classes

Threshold rules on a grid and categorical distributions over them. Every
expectation over a categorical distribution is a finite weighted sum, so this
backend supports the exact estimation mode.

Examples:
    >>> hclass = FiniteHypothesisClass.uniform_thresholds(101)
    >>> rho = CategoricalDistribution.uniform(hclass)
    >>> categorical_kl(rho, rho)
    0.0
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

from src.hypotheses.base import Classifier, HypothesisDistribution, HypothesisError
from src.ingestion.datasets import DatasetView
from src.streams import point_uniforms

logger = logging.getLogger(__name__)

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class ThresholdRule:
    """h_theta(x) = 1[x_0 >= theta]."""
    theta: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] < 1:
            raise HypothesisError(f"Threshold rules expect an n x d matrix (got shape {X.shape})")
        return (X[:, 0] >= self.theta).astype(np.int64)


class FiniteHypothesisClass:
    """A nonempty, ordered sequence of deterministic classifiers."""

    def __init__(self, hypotheses: Sequence[Classifier]):
        if len(hypotheses) == 0:
            raise HypothesisError("A finite hypothesis class needs at least one hypothesis")
        self.hypotheses: List[Classifier] = list(hypotheses)

    @classmethod
    def uniform_thresholds(cls, size: int) -> 'FiniteHypothesisClass':
        """Threshold rules on the uniform grid of `size` points in [0, 1]."""
        if size < 1:
            raise HypothesisError(f"Grid size must be positive (got {size})")
        return cls([ThresholdRule(float(theta)) for theta in np.linspace(0.0, 1.0, size)])

    def __len__(self) -> int:
        return len(self.hypotheses)

    def __getitem__(self, index: int) -> Classifier:
        return self.hypotheses[index]

    @property
    def thresholds(self) -> np.ndarray:
        """Grid of a threshold class."""
        if not all(isinstance(h, ThresholdRule) for h in self.hypotheses):
            raise HypothesisError("Only threshold classes expose a threshold grid")
        return np.array([h.theta for h in self.hypotheses])

    def predictions(self, X: np.ndarray) -> np.ndarray:
        """(M, n) matrix of predictions."""
        return np.stack([h.predict(X) for h in self.hypotheses])

    def loss_matrix(self, view: DatasetView) -> np.ndarray:
        """(M, n) matrix of zero-one losses on the points of a view."""
        return (self.predictions(view.X) != view.y[None, :]).astype(np.int8)


@dataclass
class CategoricalDistribution(HypothesisDistribution):
    """Probability vector over a finite hypothesis class."""
    hclass: FiniteHypothesisClass
    weights: np.ndarray
    lineage: Dict[str, Any] = field(default_factory=dict)

    is_finite = True

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (len(self.hclass),):
            raise HypothesisError(
                f"Expected {len(self.hclass)} weights, got shape {self.weights.shape}"
            )
        if np.any(self.weights < 0.0) or abs(self.weights.sum() - 1.0) > WEIGHT_TOL:
            raise HypothesisError(f"Weights must be a probability vector (sum={self.weights.sum()})")

    @classmethod
    def uniform(cls, hclass: FiniteHypothesisClass) -> 'CategoricalDistribution':
        return cls(hclass, np.full(len(hclass), 1.0 / len(hclass)))

    @classmethod
    def point_mass(cls, hclass: FiniteHypothesisClass, index: int) -> 'CategoricalDistribution':
        weights = np.zeros(len(hclass))
        weights[index] = 1.0
        return cls(hclass, weights)

    @classmethod
    def from_logits(cls, hclass: FiniteHypothesisClass, logits: np.ndarray,
                    lineage: Dict[str, Any] = None) -> 'CategoricalDistribution':
        """Softmax parameterization used by the trainers."""
        z = np.asarray(logits, dtype=float)
        w = np.exp(z - z.max())
        return cls(hclass, w / w.sum(), dict(lineage or {}))

    def kl(self, prior: HypothesisDistribution) -> float:
        if not isinstance(prior, CategoricalDistribution):
            raise HypothesisError("KL between different backends is undefined")
        return categorical_kl(self, prior)

    def sample_hypothesis(self, rng: np.random.Generator) -> Classifier:
        return self.hclass[int(rng.choice(len(self.hclass), p=self.weights))]

    def draw_indices(self, view: DatasetView, seed: int) -> np.ndarray:
        """Index of the hypothesis drawn for every point, by inverse-CDF on per-point uniforms."""
        u = point_uniforms(seed, view.indices, view.universe)
        cdf = np.cumsum(self.weights)
        return np.minimum(np.searchsorted(cdf, u, side='right'), len(self.weights) - 1)

    def point_losses(self, view: DatasetView, seed: int) -> np.ndarray:
        losses = self.hclass.loss_matrix(view)
        drawn = self.draw_indices(view, seed)
        return losses[drawn, np.arange(len(view))]

    def expected_point_losses(self, view: DatasetView) -> np.ndarray:
        return self.weights @ self.hclass.loss_matrix(view)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': 'categorical',
            'thresholds': self.hclass.thresholds.tolist(),
            'weights': self.weights.tolist(),
            'lineage': dict(self.lineage),
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'CategoricalDistribution':
        if payload.get('kind') != 'categorical':
            raise HypothesisError(f"Not a categorical checkpoint: {payload.get('kind')}")
        hclass = FiniteHypothesisClass([ThresholdRule(float(t)) for t in payload['thresholds']])
        return cls(hclass, np.asarray(payload['weights'], dtype=float), dict(payload.get('lineage', {})))


def categorical_kl(post: CategoricalDistribution, prior: CategoricalDistribution) -> float:
    """
    KL(post || prior) = sum_h post(h) ln(post(h) / prior(h)).

    Returns +inf when post puts mass where prior has none.
    """
    if len(post.hclass) != len(prior.hclass):
        raise HypothesisError(
            f"Hypothesis class size mismatch: {len(post.hclass)} vs {len(prior.hclass)}"
        )
    p, q = post.weights, prior.weights
    support = p > 0.0
    if np.any(q[support] == 0.0):
        return float('inf')
    return max(float(np.sum(p[support] * np.log(p[support] / q[support]))), 0.0)
