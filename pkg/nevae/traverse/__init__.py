from nevae.traverse.codes import random_direction, traverse_codes, zero_top_active
from nevae.traverse.render import quantize, render_grid, run_traverse, write_pgm, write_traverse_index
from nevae.traverse.types import TraverseKind, TraverseSpec

__all__ = [
    "TraverseKind",
    "TraverseSpec",
    "quantize",
    "random_direction",
    "render_grid",
    "run_traverse",
    "traverse_codes",
    "write_pgm",
    "write_traverse_index",
    "zero_top_active",
]
