"""
IDX Binary Parser

Parses MNIST-style IDX image/label file pairs, plain or gzip-compressed.

Layout (big-endian):
    images: uint32 magic 0x00000803 (2051), uint32 n, uint32 rows, uint32 cols,
            then n*rows*cols unsigned bytes
    labels: uint32 magic 0x00000801 (2049), uint32 n, then n unsigned bytes

Examples:
    >>> from pathlib import Path
    >>> ds = load_idx(Path("train-images-idx3-ubyte.gz"), Path("train-labels-idx1-ubyte.gz"))
    >>> ds.features.shape
    (60000, 784)
"""

import gzip
import logging
import struct
from pathlib import Path
from typing import Tuple

import numpy as np

from src.ingestion.datasets import Dataset

logger = logging.getLogger(__name__)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
GZIP_SIGNATURE = b'\x1f\x8b'


class IDXParseError(Exception):
    """Exception raised when an IDX file cannot be parsed."""
    pass


class IDXMagicError(IDXParseError):
    """The file does not start with the expected magic number."""
    pass


class IDXTruncatedError(IDXParseError):
    """The file ends before the declared payload."""
    pass


class IDXCountMismatchError(IDXParseError):
    """Image and label files declare different item counts."""
    pass


def _read_bytes(path: Path) -> bytes:
    path = Path(path)
    if not path.exists():
        raise IDXParseError(f"File not found: {path}")
    raw = path.read_bytes()
    if raw[:2] == GZIP_SIGNATURE:
        try:
            raw = gzip.decompress(raw)
        except (OSError, EOFError) as e:
            raise IDXTruncatedError(f"Corrupted gzip stream in {path}: {e}")
    return raw


def _header(raw: bytes, n_dims: int, path: Path) -> Tuple[int, ...]:
    size = 4 * (1 + n_dims)
    if len(raw) < size:
        raise IDXTruncatedError(f"Header of {path} is truncated ({len(raw)} bytes)")
    return struct.unpack(f">{1 + n_dims}I", raw[:size])


def read_idx_images(path: Path) -> np.ndarray:
    """
    Read an IDX image file into an (n, rows, cols) uint8 array.

    Raises:
        IDXMagicError: If the magic number is not 2051
        IDXTruncatedError: If the pixel payload is shorter than declared
    """
    raw = _read_bytes(path)
    magic, n, rows, cols = _header(raw, 3, path)
    if magic != IMAGE_MAGIC:
        raise IDXMagicError(f"Magic number mismatch in image file {path}: {magic} (expected {IMAGE_MAGIC})")
    expected = n * rows * cols
    payload = raw[16:]
    if len(payload) < expected:
        raise IDXTruncatedError(f"Image file {path} holds {len(payload)} of {expected} pixel bytes")
    return np.frombuffer(payload, dtype=np.uint8, count=expected).reshape(n, rows, cols)


def read_idx_labels(path: Path) -> np.ndarray:
    """
    Read an IDX label file into an (n,) uint8 array.

    Raises:
        IDXMagicError: If the magic number is not 2049
        IDXTruncatedError: If fewer labels than declared are present
    """
    raw = _read_bytes(path)
    magic, n = _header(raw, 1, path)
    if magic != LABEL_MAGIC:
        raise IDXMagicError(f"Magic number mismatch in label file {path}: {magic} (expected {LABEL_MAGIC})")
    payload = raw[8:]
    if len(payload) < n:
        raise IDXTruncatedError(f"Label file {path} holds {len(payload)} of {n} labels")
    return np.frombuffer(payload, dtype=np.uint8, count=n)


def load_idx(images_path: Path, labels_path: Path, n_classes: int = 10) -> Dataset:
    """
    Load an IDX image/label pair as a Dataset with pixels scaled to [0, 1].

    Args:
        images_path: IDX3 image file (optionally gzip-compressed)
        labels_path: IDX1 label file (optionally gzip-compressed)
        n_classes: Number of classes

    Returns:
        Dataset with flattened features of length rows*cols

    Raises:
        IDXMagicError, IDXTruncatedError, IDXCountMismatchError
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if len(images) != len(labels):
        raise IDXCountMismatchError(
            f"{images_path} has {len(images)} images but {labels_path} has {len(labels)} labels"
        )

    n, rows, cols = images.shape
    logger.info(f"Loaded {n} images of {rows}x{cols} from {Path(images_path).name}")

    return Dataset(
        features=images.reshape(n, rows * cols).astype(np.float64) / 255.0,
        labels=labels.astype(np.int64),
        n_classes=n_classes,
        provenance=f"idx:{Path(images_path).name}",
        metadata={'rows': rows, 'cols': cols},
    )


def write_idx(images: np.ndarray, labels: np.ndarray, images_path: Path, labels_path: Path,
              compress: bool = False):
    """
    Write uint8 images (n, rows, cols) and labels (n,) as an IDX pair.

    Args:
        images: Pixel array
        labels: Label array
        images_path: Destination of the image file
        labels_path: Destination of the label file
        compress: gzip both files
    """
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    image_bytes = struct.pack(">4I", IMAGE_MAGIC, n, rows, cols) + images.tobytes()
    label_bytes = struct.pack(">2I", LABEL_MAGIC, len(labels)) + labels.tobytes()
    if compress:
        image_bytes = gzip.compress(image_bytes, mtime=0)
        label_bytes = gzip.compress(label_bytes, mtime=0)
    Path(images_path).write_bytes(image_bytes)
    Path(labels_path).write_bytes(label_bytes)
    logger.debug(f"Wrote IDX pair {images_path} / {labels_path}")
