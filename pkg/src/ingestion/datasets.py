"""
Datasets and Views

In-memory labelled samples and index views over them. A view keeps the global
indices of its points so per-point random draws stay tied to the point, whichever
view it is seen through.

Examples:
    >>> ds = Dataset(np.zeros((4, 1)), np.array([0, 1, 0, 1]), n_classes=2, provenance="toy")
    >>> ds.view(np.array([1, 3])).y
    array([1, 1])
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Any, Optional

import numpy as np

logger = logging.getLogger(__name__)


class DatasetError(ValueError):
    """Raised for inconsistent datasets or out-of-range views."""
    pass


@dataclass
class Dataset:
    """n x d features with n class labels in [0, n_classes)."""
    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    provenance: str = "unknown"
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim == 1:
            self.features = self.features[:, None]
        if self.features.ndim != 2:
            raise DatasetError(f"Features must be an n x d matrix (got shape {self.features.shape})")
        if len(self.features) != len(self.labels):
            raise DatasetError(
                f"Feature/label count mismatch: {len(self.features)} vs {len(self.labels)}"
            )
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise DatasetError(f"Labels must lie in [0, {self.n_classes})")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def view(self, indices: Optional[np.ndarray] = None) -> 'DatasetView':
        if indices is None:
            indices = np.arange(len(self))
        return DatasetView(self, np.asarray(indices, dtype=np.int64))


@dataclass
class DatasetView:
    """A subset of a dataset addressed by global indices."""
    dataset: Dataset
    indices: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        if len(self.indices) and (self.indices.min() < 0 or self.indices.max() >= len(self.dataset)):
            raise DatasetError("View indices fall outside the dataset")

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def X(self) -> np.ndarray:
        return self.dataset.features[self.indices]

    @property
    def y(self) -> np.ndarray:
        return self.dataset.labels[self.indices]

    @property
    def n_classes(self) -> int:
        return self.dataset.n_classes

    @property
    def universe(self) -> int:
        """Size of the underlying dataset, i.e. the range of the global indices."""
        return len(self.dataset)

    def subset(self, positions: np.ndarray) -> 'DatasetView':
        """View over the points at the given positions of this view."""
        return DatasetView(self.dataset, self.indices[np.asarray(positions, dtype=np.int64)])


def stratified_subsample(dataset: Dataset, size: int, seed: int) -> Dataset:
    """
    Deterministic per-class proportional subsample.

    Each class receives floor(size * share) points; the remaining slots go to the
    classes with the largest fractional parts (ties toward the lower class).

    Args:
        dataset: Source dataset
        size: Number of points to keep (at most len(dataset))
        seed: Seed of the selection stream

    Returns:
        A new Dataset whose provenance records the subsample
    """
    n = len(dataset)
    if not 0 < size <= n:
        raise DatasetError(f"Subsample size must lie in [1, {n}] (got {size})")

    counts = np.bincount(dataset.labels, minlength=dataset.n_classes)
    exact = size * counts / n
    quota = np.floor(exact).astype(np.int64)
    remainder = size - int(quota.sum())
    order = np.lexsort((np.arange(len(exact)), -(exact - quota)))
    quota[order[:remainder]] += 1

    rng = np.random.default_rng(seed)
    chosen = []
    for label, k in enumerate(quota):
        members = np.flatnonzero(dataset.labels == label)
        if k:
            chosen.append(rng.choice(members, size=int(k), replace=False))
    indices = np.sort(np.concatenate(chosen)) if chosen else np.array([], dtype=np.int64)

    logger.info(f"Stratified subsample: {size} of {n} points from {dataset.provenance}")

    return Dataset(
        features=dataset.features[indices],
        labels=dataset.labels[indices],
        n_classes=dataset.n_classes,
        provenance=f"{dataset.provenance}[stratified {size}, seed={seed}]",
        metadata={**dataset.metadata, 'subsample_seed': seed, 'subsample_size': size},
    )
