"""
PAC-Bayes Bounds

PAC-Bayes-kl, PAC-Bayes-split-kl, the McAllester relaxation used as a
differentiable training objective, and the sampling bound that controls Monte
Carlo estimates of E_pi[f(h)] for a fixed distribution pi.

The union_factor argument multiplies the number of simultaneous applications that
share one delta: 1 for a single bound, T for the first step of a T-step recursion,
T * |grid| when a gamma grid is searched.

Examples:
    >>> b = BoundInputs(empirical_mean=0.0, kl_divergence=0.0, n=100)
    >>> round(pb_kl_upper(b, delta=0.05), 6)
    0.058155
    >>> round(mcallester_relaxed(b, delta=0.05), 6)
    0.173082
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from src.bounds.concentration import (
    BoundInputError,
    DiscreteSupport,
    _check_delta,
    _check_n,
    kl_inv_upper,
)
from src.config import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConfidenceBudget:
    """
    Failure-probability allocation for one certified run.

    delta is spent on the PAC-Bayes bounds (shared by union_factor applications),
    delta_prime on the Monte Carlo estimates (shared equally by sampling_parts
    estimated quantities). The final guarantee holds with probability 1 - delta - delta_prime.
    """
    delta: float = settings.DEFAULT_DELTA
    union_factor: int = 1
    delta_prime: float = settings.DEFAULT_DELTA_PRIME
    sampling_parts: int = 1

    def __post_init__(self):
        _check_delta(self.delta)
        if not 0.0 < self.delta_prime < 1.0:
            raise BoundInputError(f"delta_prime must lie in (0, 1) (got {self.delta_prime})")
        if self.delta + self.delta_prime >= 1.0:
            raise BoundInputError(
                f"delta + delta_prime must be below 1 (got {self.delta} + {self.delta_prime})"
            )
        if int(self.union_factor) != self.union_factor or self.union_factor < 1:
            raise BoundInputError(f"union_factor must be a positive integer (got {self.union_factor})")
        if int(self.sampling_parts) != self.sampling_parts or self.sampling_parts < 1:
            raise BoundInputError(f"sampling_parts must be a positive integer (got {self.sampling_parts})")

    @classmethod
    def for_recursion(cls, T: int, delta: float = None, delta_prime: float = None) -> 'ConfidenceBudget':
        """Budget of a T-step recursion: one estimate for pi_1, three per later step."""
        return cls(
            delta=settings.DEFAULT_DELTA if delta is None else delta,
            union_factor=T,
            delta_prime=settings.DEFAULT_DELTA_PRIME if delta_prime is None else delta_prime,
            sampling_parts=1 + 3 * (T - 1),
        )

    @property
    def delta_part(self) -> float:
        """Share of delta_prime given to each estimated quantity."""
        return self.delta_prime / self.sampling_parts

    @property
    def total_failure(self) -> float:
        return self.delta + self.delta_prime


@dataclass(frozen=True)
class BoundInputs:
    """Empirical Gibbs loss, KL(rho||pi) and the sample size the loss was measured on."""
    empirical_mean: float
    kl_divergence: float
    n: int

    def __post_init__(self):
        if not 0.0 <= self.empirical_mean <= 1.0:
            raise BoundInputError(f"empirical_mean must lie in [0, 1] (got {self.empirical_mean})")
        if not self.kl_divergence >= 0.0:
            raise BoundInputError(f"kl_divergence must be non-negative (got {self.kl_divergence})")
        _check_n(self.n)


def log_term(n: int, delta: float, union_factor: int = 1) -> float:
    """ln(2 * union_factor * sqrt(n) / delta)."""
    _check_n(n)
    _check_delta(delta)
    if union_factor < 1:
        raise BoundInputError(f"union_factor must be a positive integer (got {union_factor})")
    return math.log(2.0 * union_factor * math.sqrt(n) / delta)


def pb_kl_upper(b: BoundInputs, delta: float, union_factor: int = 1) -> float:
    """
    PAC-Bayes-kl bound on E_rho[L(h)].

    Returns kl_inv_upper(emp, (KL + ln(2 * union_factor * sqrt(n) / delta)) / n).

    Args:
        b: Empirical mean, KL divergence and sample size
        delta: Confidence parameter in (0, 1)
        union_factor: Number of applications sharing delta

    Returns:
        Upper bound on the expected Gibbs loss
    """
    eps = (b.kl_divergence + log_term(b.n, delta, union_factor)) / b.n
    return float(kl_inv_upper(b.empirical_mean, eps))


def pb_split_kl_upper(
    indicator_means: Union[Sequence[float], np.ndarray],
    support: DiscreteSupport,
    kl_divergence: float,
    n: int,
    delta: float,
    union_factor: int = 1
) -> float:
    """
    PAC-Bayes-split-kl bound on E_rho[E[Z]] for a discrete loss Z on `support`.

    Each of the K components gets the budget
    (KL + ln(2 * K * union_factor * sqrt(n) / delta)) / n.

    Args:
        indicator_means: E_rho of the K binarified empirical means
        support: Value grid of the loss
        kl_divergence: KL(rho||pi)
        n: Sample size behind the empirical means
        delta: Confidence parameter
        union_factor: Number of applications sharing delta

    Raises:
        BoundInputError: On a length mismatch with the support

    Examples:
        >>> support = DiscreteSupport((-0.5, 0.0, 0.5, 1.0))
        >>> pb_split_kl_upper([1.0, 1.0, 1.0], support, 3.0, 100, 0.05)
        1.0
    """
    means = np.asarray(indicator_means, dtype=float)
    if means.shape != (support.K,):
        raise BoundInputError(f"Expected {support.K} indicator means, got shape {means.shape}")
    if not kl_divergence >= 0.0:
        raise BoundInputError(f"kl_divergence must be non-negative (got {kl_divergence})")
    eps = (kl_divergence + log_term(n, delta, support.K * union_factor)) / n
    inverted = np.asarray(kl_inv_upper(means, eps))
    return float(support.low + inverted @ support.gaps)


def mcallester_relaxed(b: BoundInputs, delta: float, union_factor: int = 1) -> float:
    """
    McAllester relaxation emp + sqrt((KL + ln(2 * union_factor * sqrt(n) / delta)) / (2n)).

    Shares the log term with pb_kl_upper, so by Pinsker's inequality it is never
    smaller than the kl bound on the same inputs.
    """
    complexity = (b.kl_divergence + log_term(b.n, delta, union_factor)) / (2.0 * b.n)
    return b.empirical_mean + math.sqrt(complexity)


def sampling_upper(sample_mean: float, m: int, delta_part: float) -> float:
    """
    Upper bound on E_pi[f(h)] from m i.i.d. draws h_i ~ pi of a [0, 1]-valued f.

    No KL term appears since pi is fixed before sampling.

    Examples:
        >>> round(sampling_upper(0.0, 1000, 0.01), 6)
        0.004595
    """
    _check_n(m)
    _check_delta(delta_part)
    return float(kl_inv_upper(sample_mean, math.log(1.0 / delta_part) / m))
