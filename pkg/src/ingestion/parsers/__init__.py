"""IDX binary file parsers."""

from .idx import (
    IDXParseError,
    IDXMagicError,
    IDXTruncatedError,
    IDXCountMismatchError,
    read_idx_images,
    read_idx_labels,
    load_idx,
    write_idx,
)

__all__ = [
    'IDXParseError',
    'IDXMagicError',
    'IDXTruncatedError',
    'IDXCountMismatchError',
    'read_idx_images',
    'read_idx_labels',
    'load_idx',
    'write_idx',
]
