"""
Concentration Inequalities for Bounded Discrete Random Variables

Bernoulli kl divergence, its upper/lower inverses, binarification of discrete
random variables and the split-kl inequality.

A variable Z taking values on a grid b_0 < b_1 < ... < b_K is written as
Z = b_0 + sum_j alpha_j * 1[Z >= b_j] with alpha_j = b_j - b_{j-1}. Each indicator is
a Bernoulli variable, so the kl inequality applies to each of them and the
results are recombined with a union bound over the K components.

Examples:
    >>> round(kl_inv_upper(0.0, 0.1), 7)
    0.0951626
    >>> support = DiscreteSupport((-0.5, 0.0, 0.5, 1.0))
    >>> binarify(0.0, support).indicators
    (1, 0, 0)
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from src.config import settings

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]


class BoundInputError(ValueError):
    """Raised when a bound receives parameters outside their valid range."""
    pass


class SupportError(BoundInputError):
    """Raised for malformed supports, off-grid values or non-monotone decompositions."""
    pass


@dataclass(frozen=True)
class DiscreteSupport:
    """Sorted value grid b_0 < b_1 < ... < b_K of a discrete random variable."""
    points: Tuple[float, ...]

    def __post_init__(self):
        points = tuple(float(p) for p in self.points)
        if len(points) < 2:
            raise SupportError(f"Support needs at least two points (got {len(points)})")
        if not all(np.isfinite(points)):
            raise SupportError(f"Support points must be finite: {points}")
        if any(b <= a for a, b in zip(points, points[1:])):
            raise SupportError(f"Support points must be strictly increasing: {points}")
        object.__setattr__(self, 'points', points)

    @property
    def K(self) -> int:
        return len(self.points) - 1

    @property
    def gaps(self) -> np.ndarray:
        """alpha_j = b_j - b_{j-1} for j = 1..K."""
        return np.diff(np.asarray(self.points, dtype=float))

    @property
    def low(self) -> float:
        return self.points[0]

    @property
    def high(self) -> float:
        return self.points[-1]

    @property
    def span(self) -> float:
        return self.high - self.low

    def index_of(self, z: float, tol: float = None) -> int:
        """Position of z on the grid; raises SupportError if z is off-grid."""
        tol = settings.SUPPORT_TOL if tol is None else tol
        distances = np.abs(np.asarray(self.points) - float(z))
        idx = int(np.argmin(distances))
        if distances[idx] > tol:
            raise SupportError(f"Value {z} is not on the support grid {self.points}")
        return idx


@dataclass(frozen=True)
class BinaryDecomposition:
    """Indicators Z_{|j} = 1[Z >= b_j] for j = 1..K."""
    indicators: Tuple[int, ...]

    def __post_init__(self):
        indicators = tuple(int(v) for v in self.indicators)
        if any(v not in (0, 1) for v in indicators):
            raise SupportError(f"Indicators must be 0/1: {indicators}")
        if any(b > a for a, b in zip(indicators, indicators[1:])):
            raise SupportError(f"Indicators must be non-increasing in j: {indicators}")
        object.__setattr__(self, 'indicators', indicators)

    @property
    def level(self) -> int:
        """Number of thresholds reached, i.e. the grid index of the value."""
        return sum(self.indicators)


def _check_prob(name: str, value: np.ndarray):
    if np.any(np.isnan(value)) or np.any(value < 0.0) or np.any(value > 1.0):
        raise BoundInputError(f"{name} must lie in [0, 1] (got {value})")


def _check_delta(delta: float):
    if not 0.0 < delta < 1.0:
        raise BoundInputError(f"delta must lie in (0, 1) (got {delta})")


def _check_n(n: int):
    if int(n) != n or n < 1:
        raise BoundInputError(f"Sample size must be a positive integer (got {n})")


def _as_output(value: np.ndarray, scalar: bool):
    return float(value) if scalar else value


def bern_kl(p: ArrayLike, q: ArrayLike) -> Union[float, np.ndarray]:
    """
    Binary relative entropy kl(p||q) = KL((1-p, p) || (1-q, q)).

    Uses 0*ln(0/x) = 0 and returns +inf when (p > 0, q = 0) or (p < 1, q = 1).

    Args:
        p: Mean(s) of the first Bernoulli distribution
        q: Mean(s) of the second Bernoulli distribution

    Returns:
        Divergence in nats (float for scalar inputs, array otherwise)

    Examples:
        >>> bern_kl(0.0, 0.5)
        0.6931471805599453
    """
    scalar = np.ndim(p) == 0 and np.ndim(q) == 0
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_prob("p", p)
    _check_prob("q", q)

    with np.errstate(divide='ignore', invalid='ignore'):
        head = np.where(p > 0.0, p * np.log(p / q), 0.0)
        tail = np.where(p < 1.0, (1.0 - p) * np.log((1.0 - p) / (1.0 - q)), 0.0)
    kl = np.maximum(head + tail, 0.0)
    return _as_output(kl, scalar)


def _bisect(p_hat: np.ndarray, eps: np.ndarray, upper: bool) -> np.ndarray:
    """
    Vectorized bisection for kl(p_hat || q) = eps on [p_hat, 1] or [0, p_hat].

    The bracket shrinks until every interval is below KL_INV_TOL and then keeps
    going to float resolution (at most KL_INV_MAX_ITER halvings), because
    kl(p_hat||.) has an unbounded derivative near the boundary.
    """
    if upper:
        lo, hi = p_hat.copy(), np.ones_like(p_hat)
    else:
        lo, hi = np.zeros_like(p_hat), p_hat.copy()

    for _ in range(settings.KL_INV_MAX_ITER):
        mid = 0.5 * (lo + hi)
        stalled = (mid == lo) | (mid == hi)
        if np.all(stalled):
            break
        inside = bern_kl(p_hat, mid) <= eps
        if upper:
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        else:
            hi = np.where(inside, mid, hi)
            lo = np.where(inside, lo, mid)

    width = float(np.max(hi - lo)) if hi.size else 0.0
    if width > settings.KL_INV_TOL:
        logger.warning(f"kl inverse bracket did not close: width={width:.3g}")

    # the reported end point is the conservative one
    return hi if upper else lo


def _kl_inverse(p_hat: ArrayLike, eps: ArrayLike, upper: bool) -> Union[float, np.ndarray]:
    scalar = np.ndim(p_hat) == 0 and np.ndim(eps) == 0
    p_hat, eps = np.broadcast_arrays(np.asarray(p_hat, dtype=float), np.asarray(eps, dtype=float))
    _check_prob("p_hat", p_hat)
    if np.any(np.isnan(eps)) or np.any(eps < 0.0):
        raise BoundInputError(f"eps must be non-negative (got {eps})")

    p_hat = p_hat.astype(float, copy=True)
    eps = eps.astype(float, copy=True)
    solved = _bisect(p_hat, np.minimum(eps, np.finfo(float).max), upper)

    with np.errstate(over='ignore'):
        if upper:
            # closed forms: kl(0||q) = -ln(1-q), kl(1||1) = 0
            result = np.where(p_hat == 1.0, 1.0, solved)
            result = np.where(p_hat == 0.0, -np.expm1(-eps), result)
        else:
            # closed forms: kl(1||q) = -ln q, kl(0||0) = 0
            result = np.where(p_hat == 0.0, 0.0, solved)
            result = np.where(p_hat == 1.0, np.exp(-eps), result)
    result = np.where(eps == 0.0, p_hat, result)
    result = np.clip(result, 0.0, 1.0)
    if upper:
        result = np.maximum(result, p_hat)
    else:
        result = np.minimum(result, p_hat)
    return _as_output(result, scalar)


def kl_inv_upper(p_hat: ArrayLike, eps: ArrayLike) -> Union[float, np.ndarray]:
    """
    Upper kl inverse: max{q in [p_hat, 1] : kl(p_hat||q) <= eps}.

    Args:
        p_hat: Empirical mean(s) in [0, 1]
        eps: Non-negative divergence budget(s)

    Returns:
        The largest mean consistent with p_hat under the budget

    Raises:
        BoundInputError: If p_hat is outside [0, 1] or eps < 0

    Examples:
        >>> kl_inv_upper(0.5, 0.0)
        0.5
        >>> kl_inv_upper(1.0, 0.7)
        1.0
    """
    return _kl_inverse(p_hat, eps, upper=True)


def kl_inv_lower(p_hat: ArrayLike, eps: ArrayLike) -> Union[float, np.ndarray]:
    """
    Lower kl inverse: min{q in [0, p_hat] : kl(p_hat||q) <= eps}.

    Examples:
        >>> kl_inv_lower(0.0, 0.3)
        0.0
    """
    return _kl_inverse(p_hat, eps, upper=False)


def binarify(z: float, support: DiscreteSupport) -> BinaryDecomposition:
    """
    Decompose a grid value into its threshold indicators 1[z >= b_j], j = 1..K.

    Raises:
        SupportError: If z is not a support point (tolerance SUPPORT_TOL)

    Examples:
        >>> binarify(1.0, DiscreteSupport((-0.5, 0.0, 0.5, 1.0))).indicators
        (1, 1, 1)
    """
    level = support.index_of(z)
    return BinaryDecomposition(tuple(1 if j <= level else 0 for j in range(1, support.K + 1)))


def reconstruct(d: BinaryDecomposition, support: DiscreteSupport) -> float:
    """
    Inverse of binarify: b_0 + sum_j alpha_j * indicator_j.

    Monotone indicators telescope the sum to the grid point b_level, which is
    returned directly so the round trip is exact in floating point.

    Raises:
        SupportError: On a length mismatch with the support
    """
    if not isinstance(d, BinaryDecomposition):
        d = BinaryDecomposition(tuple(d))
    if len(d.indicators) != support.K:
        raise SupportError(
            f"Decomposition has {len(d.indicators)} indicators, support needs {support.K}"
        )
    return support.points[d.level]


def indicator_matrix(values: np.ndarray, support: DiscreteSupport) -> np.ndarray:
    """
    Binarify an array of grid values at once.

    Returns:
        Boolean array of shape values.shape + (K,), entry j-1 being values >= b_j
    """
    values = np.asarray(values, dtype=float)
    thresholds = np.asarray(support.points[1:]) - settings.SUPPORT_TOL
    return values[..., None] >= thresholds


def split_kl_upper(
    indicator_means: ArrayLike,
    support: DiscreteSupport,
    n: int,
    delta: float
) -> Union[float, np.ndarray]:
    """
    Split-kl upper bound on the mean of a discrete random variable.

    Returns b_0 + sum_j alpha_j * kl_inv_upper(p_j, ln(K/delta)/n), which upper-bounds
    E[Z] with probability at least 1 - delta over the n-sample.

    Args:
        indicator_means: Empirical means of the K binarified components; a trailing
            axis of length K allows many bounds at once
        support: Value grid of Z
        n: Number of i.i.d. draws behind the means
        delta: Confidence parameter in (0, 1)

    Raises:
        BoundInputError: On a length mismatch or invalid parameters

    Examples:
        >>> split_kl_upper([1.0, 1.0, 1.0], DiscreteSupport((-0.5, 0.0, 0.5, 1.0)), 50, 0.05)
        1.0
    """
    _check_n(n)
    _check_delta(delta)
    means = np.asarray(indicator_means, dtype=float)
    if means.ndim == 0 or means.shape[-1] != support.K:
        raise BoundInputError(
            f"Expected {support.K} indicator means, got shape {means.shape}"
        )
    eps = math.log(support.K / delta) / n
    inverted = np.asarray(kl_inv_upper(means, eps))
    bound = support.low + inverted @ support.gaps
    return float(bound) if means.ndim == 1 else bound


def kl_bound_upper(p_hat: ArrayLike, n: int, delta: float) -> Union[float, np.ndarray]:
    """
    kl inequality: upper confidence bound kl_inv_upper(p_hat, ln(1/delta)/n).

    Examples:
        >>> round(kl_bound_upper(0.0, 100, 0.05), 6)
        0.029513
    """
    _check_n(n)
    _check_delta(delta)
    return kl_inv_upper(p_hat, math.log(1.0 / delta) / n)


def kl_bound_lower(p_hat: ArrayLike, n: int, delta: float) -> Union[float, np.ndarray]:
    """Lower confidence counterpart of kl_bound_upper."""
    _check_n(n)
    _check_delta(delta)
    return kl_inv_lower(p_hat, math.log(1.0 / delta) / n)
