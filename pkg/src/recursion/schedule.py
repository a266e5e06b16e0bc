"""
Data Split Schedules

Partition of n (shuffled) positions into consecutive chunks S_1..S_T, with the
training prefixes S_1..S_t and validation suffixes S_t..S_T the recursion uses.

Examples:
    >>> geometric_split(60000, 4).chunk_sizes
    (7500, 7500, 15000, 30000)
    >>> geometric_split(60000, 4).n_val(2)
    52500
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

logger = logging.getLogger(__name__)


class ScheduleError(ValueError):
    """Raised for infeasible or inconsistent split schedules."""
    pass


@dataclass(frozen=True)
class SplitSchedule:
    """Chunk sizes s_1..s_T over total_n positions; steps are numbered from 1."""
    total_n: int
    chunk_sizes: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'chunk_sizes', tuple(int(s) for s in self.chunk_sizes))
        if not self.chunk_sizes:
            raise ScheduleError("A schedule needs at least one chunk")
        if min(self.chunk_sizes) < 1:
            raise ScheduleError(f"Every chunk must be nonempty: {self.chunk_sizes}")
        if sum(self.chunk_sizes) != self.total_n:
            raise ScheduleError(
                f"Chunk sizes {self.chunk_sizes} do not sum to total_n={self.total_n}"
            )

    @property
    def T(self) -> int:
        return len(self.chunk_sizes)

    def _bounds(self, t: int) -> Tuple[int, int]:
        if not 1 <= t <= self.T:
            raise ScheduleError(f"Step {t} outside 1..{self.T}")
        start = sum(self.chunk_sizes[:t - 1])
        return start, start + self.chunk_sizes[t - 1]

    def chunk(self, t: int) -> np.ndarray:
        """Positions of S_t."""
        start, end = self._bounds(t)
        return np.arange(start, end)

    def train_prefix(self, t: int) -> np.ndarray:
        """Positions of S_1 u ... u S_t."""
        _, end = self._bounds(t)
        return np.arange(0, end)

    def val_suffix(self, t: int) -> np.ndarray:
        """Positions of S_t u ... u S_T; S_t comes first."""
        start, _ = self._bounds(t)
        return np.arange(start, self.total_n)

    def n_val(self, t: int) -> int:
        start, _ = self._bounds(t)
        return self.total_n - start


def geometric_split(n: int, T: int) -> SplitSchedule:
    """
    Geometric chunk sizes: each later chunk roughly doubles the previous one.

    s_t = floor(n / 2^(T-t+1)) for t >= 3, s_2 = ceil(n / 2^(T-1)), and s_1 takes
    the remainder. For T <= 2 the last chunk is floor(n / 2).

    Args:
        n: Number of points
        T: Number of chunks

    Returns:
        SplitSchedule with every validation suffix holding at least n/2 points

    Raises:
        ScheduleError: If T < 1 or n < 2^(T-1)
    """
    if T < 1:
        raise ScheduleError(f"T must be positive (got {T})")
    if n < 2 ** (T - 1) or n < 1:
        raise ScheduleError(f"n={n} is too small for T={T} nonempty geometric chunks (need {2 ** (T - 1)})")

    if T == 1:
        sizes = [n]
    elif T == 2:
        sizes = [n - n // 2, n // 2]
    else:
        tail = [n // 2 ** (T - t + 1) for t in range(3, T + 1)]
        second = math.ceil(n / 2 ** (T - 1))
        sizes = [n - second - sum(tail), second] + tail

    schedule = SplitSchedule(total_n=n, chunk_sizes=tuple(sizes))
    logger.debug(f"Geometric split of {n} into {T}: {schedule.chunk_sizes}")
    return schedule
