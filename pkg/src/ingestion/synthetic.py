"""
Synthetic Threshold Data

One-dimensional data with an exactly computable risk: X ~ Uniform[0, 1],
Y = 1[X >= theta_star] flipped independently with probability eta. Threshold rules
h_theta(x) = 1[x >= theta] then have risk eta + (1 - 2 eta)|theta - theta_star|.

Examples:
    >>> dist = ThresholdDistribution(theta_star=0.5, eta=0.1)
    >>> round(true_risk_threshold(0.7, dist), 10)
    0.26
"""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from src.ingestion.datasets import Dataset, DatasetError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ThresholdDistribution:
    """Ground-truth threshold theta_star and label-noise rate eta."""
    theta_star: float = 0.5
    eta: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.theta_star <= 1.0:
            raise DatasetError(f"theta_star must lie in [0, 1] (got {self.theta_star})")
        if not 0.0 <= self.eta < 0.5:
            raise DatasetError(f"eta must lie in [0, 0.5) (got {self.eta})")


def gen_threshold_data(dist: ThresholdDistribution, n: int, seed: int) -> Dataset:
    """
    Draw n labelled points from the threshold distribution.

    Args:
        dist: Threshold distribution
        n: Number of points
        seed: Seed of the sampling stream

    Returns:
        Dataset with one feature and binary labels
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, size=n)
    flips = rng.uniform(0.0, 1.0, size=n) < dist.eta
    y = (x >= dist.theta_star).astype(np.int64) ^ flips.astype(np.int64)

    logger.debug(f"Generated {n} threshold points (theta*={dist.theta_star}, eta={dist.eta})")

    return Dataset(
        features=x[:, None],
        labels=y,
        n_classes=2,
        provenance=f"threshold(theta*={dist.theta_star}, eta={dist.eta}, seed={seed})",
    )


def true_risk_threshold(theta: Union[float, np.ndarray], dist: ThresholdDistribution):
    """
    Exact zero-one risk of h_theta under the threshold distribution.

    Args:
        theta: Threshold(s) in [0, 1]

    Returns:
        eta + (1 - 2 eta) |theta - theta_star|
    """
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(theta_arr < 0.0) or np.any(theta_arr > 1.0):
        raise DatasetError(f"theta must lie in [0, 1] (got {theta})")
    risk = dist.eta + (1.0 - 2.0 * dist.eta) * np.abs(theta_arr - dist.theta_star)
    return float(risk) if risk.ndim == 0 else risk
