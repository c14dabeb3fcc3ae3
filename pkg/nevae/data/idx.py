# nevae/data/idx.py

"""
IDX container (the MNIST distribution format), read and written bit-exactly.

    [offset] [type]          [value]
    0000     32 bit integer  0x00000803 images / 0x00000801 labels (big-endian)
    0004     32 bit integer  dimension 0 (item count)
    0008     32 bit integer  dimension 1 (rows), ... one per dimension
    ....     unsigned byte   payload, row-major
"""

import logging
import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from nevae.data.types import Dataset, square_side
from nevae.errors import BadMagicError, DatasetError, DimensionOverflowError, TruncatedFileError

logger = logging.getLogger(__name__)

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
MAX_IDX_ELEMENTS = 2**31 - 1

PathLike = Union[str, Path]


def read_idx(path: PathLike, expected_magic: int) -> np.ndarray:
    path = Path(path)
    buffer = path.read_bytes()
    if len(buffer) < 4:
        raise TruncatedFileError(f"{path}: {len(buffer)} bytes, too short for an IDX magic number")
    (magic,) = struct.unpack(">I", buffer[:4])
    if magic != expected_magic:
        raise BadMagicError(f"{path}: magic 0x{magic:08x}, expected 0x{expected_magic:08x}")
    ndim = magic & 0xFF
    header_size = 4 + 4 * ndim
    if len(buffer) < header_size:
        raise TruncatedFileError(f"{path}: header declares {ndim} dimensions but the file has {len(buffer)} bytes")
    dims = struct.unpack(f">{ndim}I", buffer[4:header_size])
    count = 1
    for extent in dims:
        count *= extent
    if count > MAX_IDX_ELEMENTS:
        raise DimensionOverflowError(f"{path}: dimensions {dims} declare {count} elements (limit {MAX_IDX_ELEMENTS})")
    if len(buffer) < header_size + count:
        raise TruncatedFileError(
            f"{path}: header declares {count} payload bytes, only {len(buffer) - header_size} present"
        )
    if len(buffer) > header_size + count:
        logger.warning(f"{path}: ignoring {len(buffer) - header_size - count} trailing bytes")
    return np.frombuffer(buffer, dtype=np.uint8, count=count, offset=header_size).reshape(dims)


def write_idx(path: PathLike, array: np.ndarray) -> Path:
    """Write an unsigned-byte array; the magic encodes the dimension count."""
    path = Path(path)
    array = np.asarray(array)
    if array.dtype != np.uint8:
        raise ValueError(f"IDX payload must be uint8, got {array.dtype}")
    magic = 0x00000800 | array.ndim
    header = struct.pack(f">I{array.ndim}I", magic, *array.shape)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(header + np.ascontiguousarray(array).tobytes())
    return path


def load_idx(images_path: PathLike, labels_path: Optional[PathLike] = None) -> Dataset:
    raw = read_idx(images_path, IMAGES_MAGIC)
    n, rows, cols = raw.shape
    if n == 0:
        raise DatasetError(f"{images_path}: no images")
    images = raw.reshape(n, rows * cols).astype(np.float64) / 255.0
    labels = None
    if labels_path is not None:
        labels = read_idx(labels_path, LABELS_MAGIC).astype(np.int64)
        if labels.shape[0] != n:
            raise DatasetError(f"{labels_path}: {labels.shape[0]} labels for {n} images")
    logger.info(f"Loaded {n} images of {rows}x{cols} from {images_path}")
    return Dataset(images=images, image_side=rows if rows == cols else None, labels=labels)


def save_idx(dataset: Dataset, images_path: PathLike, labels_path: Optional[PathLike] = None) -> None:
    """Store a dataset as IDX, quantizing pixels to round(255 * x)."""
    if labels_path is not None:
        if dataset.labels is None:
            raise DatasetError("dataset has no labels to write")
        if dataset.labels.min() < 0 or dataset.labels.max() > 255:
            raise DatasetError(
                f"IDX labels are unsigned bytes, got values in [{dataset.labels.min()}, {dataset.labels.max()}]"
            )
    side = dataset.image_side or square_side(dataset.pixels)
    shape = (dataset.n, side, side) if side else (dataset.n, 1, dataset.pixels)
    quantized = np.floor(dataset.images * 255.0 + 0.5).astype(np.uint8).reshape(shape)
    write_idx(images_path, quantized)
    if labels_path is not None:
        write_idx(labels_path, dataset.labels.astype(np.uint8))
