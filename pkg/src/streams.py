"""
Named Random Streams

Expands one root seed into independent, reproducible seeds addressed by name
(e.g. "split", "trainer:3", "prior-draws:2"), and provides per-point draws keyed by
a point's global dataset index so results do not depend on evaluation order.

Examples:
    >>> streams = SeedStreams(42)
    >>> streams.seed("split") == SeedStreams(42).seed("split")
    True
"""

import logging
import zlib
from typing import Dict, List, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class SeedStreams:
    """Root seed plus the record of every named stream handed out."""

    def __init__(self, root_seed: int):
        self.root_seed = int(root_seed)
        self.issued: Dict[str, int] = {}

    def seed(self, name: str) -> int:
        """Deterministic 63-bit seed for a stream name."""
        key = zlib.crc32(name.encode('utf-8'))
        state = np.random.SeedSequence([self.root_seed, key]).generate_state(1, dtype=np.uint64)
        value = int(state[0]) & ((1 << 63) - 1)
        self.issued[name] = value
        return value

    def rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng(self.seed(name))

    def lineage(self) -> Dict[str, int]:
        """Root seed and every issued stream, for output metadata."""
        return {'root_seed': self.root_seed, **dict(sorted(self.issued.items()))}


def point_uniforms(seed: int, indices: np.ndarray, universe: int) -> np.ndarray:
    """One Uniform[0, 1) draw per point, keyed by global index."""
    draws = np.random.default_rng(seed).random(universe)
    return draws[np.asarray(indices, dtype=np.int64)]


def point_normals(seed: int, indices: np.ndarray, universe: int, widths: Sequence[int]) -> List[np.ndarray]:
    """
    Standard normal blocks, one row per point and one block per width.

    Row i of every block depends only on (seed, global index i), so two views that
    share a point share its draw.
    """
    rng = np.random.default_rng(seed)
    indices = np.asarray(indices, dtype=np.int64)
    return [rng.standard_normal((universe, width))[indices] for width in widths]


def trial_seeds(seed: int, trials: int) -> List[int]:
    """Independent per-trial seeds spawned from one root seed."""
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]
