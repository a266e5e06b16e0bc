"""
Differentiable Surrogates

Smooth stand-ins for the zero-one loss and the threshold indicators used while
training: a sigmoid approximation of 1[z >= z0] and a cross-entropy that is
bounded to [0, 1] by mixing the softmax output with a uniform floor.

Examples:
    >>> round(float(sigmoid_indicator(1.0, 0.0, 5.0)), 6)
    0.993307
    >>> cfg = SurrogateConfig(k=10)
    >>> round(float(bounded_cross_entropy(np.zeros((1, 10)), np.array([3]), cfg)[0]), 6)
    0.166667
"""

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from src.config import settings
from src.hypotheses.base import HypothesisError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class SurrogateConfig:
    """Indicator sharpness c1, softmax temperature c2, output floor p_min, classes k."""
    k: int
    c1: float = settings.C1
    c2: float = settings.C2
    p_min: float = settings.P_MIN

    def __post_init__(self):
        if self.k < 2:
            raise HypothesisError(f"Need at least two classes (got {self.k})")
        if self.c1 <= 0.0 or self.c2 <= 0.0:
            raise HypothesisError(f"c1 and c2 must be positive (got {self.c1}, {self.c2})")
        if not 0.0 < self.p_min < 1.0:
            raise HypothesisError(f"p_min must lie in (0, 1) (got {self.p_min})")

    @property
    def scale(self) -> float:
        """ln(k / p_min), the largest value of -ln of the floored output."""
        return math.log(self.k / self.p_min)


def _logistic(x: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(x))
    return np.where(x >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def sigmoid_indicator(z: ArrayLike, z0: ArrayLike, c1: float) -> ArrayLike:
    """
    1 / (1 + exp(-c1 (z - z0))): increasing in z, 1/2 at z0, tends to 1[z >= z0].
    """
    value = _logistic(c1 * (np.asarray(z, dtype=float) - z0))
    return float(value) if value.ndim == 0 else value


def sigmoid_indicator_grad(z: ArrayLike, z0: ArrayLike, c1: float) -> np.ndarray:
    """d sigmoid_indicator / dz."""
    s = _logistic(c1 * (np.asarray(z, dtype=float) - z0))
    return c1 * s * (1.0 - s)


def bounded_cross_entropy(logits: np.ndarray, y: np.ndarray, cfg: SurrogateConfig,
                          with_grad: bool = False) -> Union[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
    """
    -ln((1 - p_min) softmax(c2 u)_y + p_min / k) / ln(k / p_min) for every row u of logits.

    Args:
        logits: (B, k) matrix
        y: (B,) class indices
        cfg: Surrogate parameters
        with_grad: Also return d value / d logits, shape (B, k)

    Returns:
        Values in (0, 1], optionally with their gradient
    """
    u = np.asarray(logits, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if u.ndim != 2 or u.shape[1] != cfg.k or len(y) != len(u):
        raise HypothesisError(f"Expected ({len(y)}, {cfg.k}) logits, got shape {u.shape}")

    scaled = cfg.c2 * u
    scaled -= scaled.max(axis=1, keepdims=True)
    probs = np.exp(scaled)
    probs /= probs.sum(axis=1, keepdims=True)
    rows = np.arange(len(y))
    floored = (1.0 - cfg.p_min) * probs[rows, y] + cfg.p_min / cfg.k
    values = -np.log(floored) / cfg.scale
    if not with_grad:
        return values

    onehot = np.zeros_like(probs)
    onehot[rows, y] = 1.0
    coeff = -(1.0 - cfg.p_min) * cfg.c2 * probs[rows, y] / (floored * cfg.scale)
    return values, coeff[:, None] * (onehot - probs)
