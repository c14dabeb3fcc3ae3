# nevae/traverse/render.py

import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from nevae.autodiff import Tensor
from nevae.data.types import square_side
from nevae.errors import TraverseError
from nevae.tools import write_json
from nevae.traverse.types import TraverseSpec

logger = logging.getLogger(__name__)

SEPARATOR = 255

PathLike = Union[str, Path]


def quantize(probs: np.ndarray) -> np.ndarray:
    """[0, 1] -> uint8 by round-half-up of 255 * p."""
    return np.floor(255.0 * np.clip(probs, 0.0, 1.0) + 0.5).astype(np.uint8)


def render_grid(
    codes: np.ndarray,
    decoder,
    rows: int,
    cols: int,
    image_shape: Optional[Tuple[int, int]] = None,
) -> np.ndarray:
    """
    Decode every code to its mean image and tile them row-major.

    Tiles are separated, and the grid framed, by 1-pixel lines of value 255.
    Returns a [rows * h + rows + 1, cols * w + cols + 1] uint8 image.
    """
    codes = np.atleast_2d(np.asarray(codes, dtype=np.float64))
    n = codes.shape[0]
    if rows < 1 or cols < 1 or rows * cols < n:
        raise TraverseError(f"layout {rows}x{cols} cannot hold {n} tiles")
    if image_shape is None:
        side = square_side(decoder.pixels)
        if side is None:
            raise TraverseError(f"decoder emits {decoder.pixels} pixels, not a square image; pass image_shape")
        image_shape = (side, side)
    h, w = image_shape
    if h * w != decoder.pixels:
        raise TraverseError(f"image_shape {image_shape} does not match {decoder.pixels} pixels")

    tiles = quantize(decoder.mean(Tensor(codes)).data).reshape(n, h, w)
    grid = np.full((rows * h + rows + 1, cols * w + cols + 1), SEPARATOR, dtype=np.uint8)
    for index, tile in enumerate(tiles):
        r, c = divmod(index, cols)
        top, left = 1 + r * (h + 1), 1 + c * (w + 1)
        grid[top:top + h, left:left + w] = tile
    return grid


def write_pgm(path: PathLike, image: np.ndarray) -> Path:
    """Binary PGM (P5, maxval 255)."""
    image = np.asarray(image)
    if image.dtype != np.uint8 or image.ndim != 2:
        raise TraverseError(f"PGM needs a 2-D uint8 image, got {image.dtype} {image.shape}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    height, width = image.shape
    path.write_bytes(f"P5\n{width} {height}\n255\n".encode("ascii") + image.tobytes())
    logger.info(f"Wrote {width}x{height} grid to {path}")
    return path


def write_traverse_index(path: PathLike, codes: np.ndarray, spec: TraverseSpec) -> Path:
    rows, cols = spec.layout()
    tiles = [
        {"tile": index, "row": index // cols, "col": index % cols, "code": [float(v) for v in code]}
        for index, code in enumerate(np.asarray(codes))
    ]
    payload = {"spec": spec.model_dump(), "rows": rows, "cols": cols, "tiles": tiles}
    return write_json(path, payload)


def run_traverse(spec: TraverseSpec, decoder, out_dir: PathLike, codes: np.ndarray) -> Tuple[Path, Path]:
    """Render ``codes`` for ``spec`` into out_dir as <name>.pgm plus <name>.json."""
    rows, cols = spec.layout()
    grid = render_grid(codes, decoder, rows, cols)
    out_dir = Path(out_dir)
    pgm = write_pgm(out_dir / spec.filename(), grid)
    index = write_traverse_index(out_dir / spec.filename().replace(".pgm", ".json"), codes, spec)
    return pgm, index
