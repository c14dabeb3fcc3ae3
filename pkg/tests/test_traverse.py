# tests/test_traverse.py

import json

import numpy as np
import pytest
from pydantic import ValidationError

from nevae.autodiff import Tensor
from nevae.errors import TraverseError
from nevae.models import DecoderParams, decode
from nevae.traverse import (
    TraverseSpec,
    quantize,
    random_direction,
    render_grid,
    run_traverse,
    traverse_codes,
    write_pgm,
    zero_top_active,
)


def _zero_decoder(n_z: int = 3, pixels: int = 16) -> DecoderParams:
    return DecoderParams(
        weights=[Tensor(np.zeros((n_z, pixels)), requires_grad=True)],
        biases=[Tensor(np.zeros(pixels), requires_grad=True)],
        activations=["linear"],
    )


def _read_pgm(path):
    raw = path.read_bytes()
    magic, size, maxval, payload = raw.split(b"\n", 3)
    width, height = (int(v) for v in size.split())
    return magic, int(maxval), np.frombuffer(payload, dtype=np.uint8).reshape(height, width)


# --- Codes ---

def test_single_dim_codes():
    codes = traverse_codes(TraverseSpec(kind="single_dim", dim=3), n_z=32)
    assert codes.shape == (100, 32)
    np.testing.assert_array_equal(codes[0], np.eye(32)[3] * -10.0)
    np.testing.assert_array_equal(codes[-1], np.eye(32)[3] * 10.0)
    assert np.count_nonzero(np.delete(codes, 3, axis=1)) == 0
    assert np.all(np.diff(codes[:, 3]) > 0)


def test_single_dim_midpoint_decodes_like_origin(tiny_model):
    codes = traverse_codes(TraverseSpec(kind="single_dim", dim=1, n_points=3), n_z=3)
    assert codes[1, 1] == 0.0
    np.testing.assert_array_equal(
        decode(codes[1:2], tiny_model.decoder).probs.data,
        decode(np.zeros((1, 3)), tiny_model.decoder).probs.data,
    )


def test_random_direction_codes():
    spec = TraverseSpec(kind="random_direction", seed=5, zero_dims=[0, 2])
    codes = traverse_codes(spec, n_z=8)
    np.testing.assert_array_equal(codes[0], np.zeros(8))
    assert np.linalg.norm(codes[-1]) == pytest.approx(10.0, abs=1e-9)
    assert np.linalg.matrix_rank(codes) == 1
    assert np.all(codes[:, [0, 2]] == 0.0)


def test_random_direction_is_seeded():
    np.testing.assert_array_equal(random_direction(6, 1), random_direction(6, 1))
    assert not np.array_equal(random_direction(6, 1), random_direction(6, 2))
    assert np.linalg.norm(random_direction(6, 1)) == pytest.approx(1.0)


def test_traverse_code_errors():
    with pytest.raises(TraverseError):
        traverse_codes(TraverseSpec(kind="single_dim", dim=4), n_z=4)
    with pytest.raises(TraverseError):
        traverse_codes(TraverseSpec(kind="random_direction", zero_dims=[0, 1]), n_z=2)
    with pytest.raises(TraverseError):
        traverse_codes(TraverseSpec(kind="random_direction", zero_dims=[5]), n_z=4)


def test_spec_validation():
    with pytest.raises(ValidationError):
        TraverseSpec(lo=1.0, hi=1.0)
    with pytest.raises(ValidationError):
        TraverseSpec(n_points=1)
    assert TraverseSpec(zero_dims=[3, 1, 3]).zero_dims == [1, 3]


@pytest.mark.parametrize(
    "activity, k, expected",
    [
        ([0.1, 2.0, 0.5, 3.0], 2, [1, 3]),
        ([0.1, 2.0, 0.5, 3.0], 0, []),
        ([1.0, 1.0, 1.0], 2, [0, 1]),
        ([0.0, 0.2, 0.2, 0.1], 1, [1]),
    ],
)
def test_zero_top_active(activity, k, expected):
    assert zero_top_active(activity, k) == expected


def test_zero_top_active_rejects_bad_k():
    with pytest.raises(ValueError):
        zero_top_active([1.0, 2.0], 3)


# --- Rendering ---

def test_quantize_rounds_half_up():
    np.testing.assert_array_equal(quantize(np.array([0.0, 0.5, 1.0, 0.25, -0.1])), [0, 128, 255, 64, 0])


def test_zero_decoder_grid_values():
    grid = render_grid(np.zeros((3, 3)), _zero_decoder(), rows=2, cols=2)
    assert grid.shape == (2 * 4 + 3, 2 * 4 + 3)
    np.testing.assert_array_equal(grid[1:5, 1:5], np.full((4, 4), 128))
    np.testing.assert_array_equal(grid[1:5, 6:10], np.full((4, 4), 128))
    np.testing.assert_array_equal(grid[6:10, 1:5], np.full((4, 4), 128))
    # unused fourth tile and separators stay at the background value
    np.testing.assert_array_equal(grid[6:10, 6:10], np.full((4, 4), 255))
    assert np.all(grid[0] == 255) and np.all(grid[:, 5] == 255)


def test_single_tile_grid():
    grid = render_grid(np.zeros((1, 3)), _zero_decoder(), rows=1, cols=1)
    assert grid.shape == (6, 6)


def test_grid_layout_errors():
    with pytest.raises(TraverseError):
        render_grid(np.zeros((5, 3)), _zero_decoder(), rows=2, cols=2)
    with pytest.raises(TraverseError):
        render_grid(np.zeros((1, 3)), _zero_decoder(pixels=12), rows=1, cols=1)
    grid = render_grid(np.zeros((1, 3)), _zero_decoder(pixels=12), rows=1, cols=1, image_shape=(3, 4))
    assert grid.shape == (5, 6)


def test_layout_and_filename():
    assert TraverseSpec(kind="single_dim", dim=3).layout() == (10, 10)
    assert TraverseSpec(n_points=7).layout() == (1, 7)
    assert TraverseSpec(n_points=7, cols=3).layout() == (3, 3)
    assert TraverseSpec(kind="single_dim", dim=3).filename() == "traverse_single_dim_3.pgm"
    assert TraverseSpec(kind="random_direction", seed=9).filename() == "traverse_random_direction_9.pgm"


def test_write_pgm_header(tmp_path):
    image = np.arange(12, dtype=np.uint8).reshape(3, 4)
    path = write_pgm(tmp_path / "out.pgm", image)
    assert path.read_bytes().startswith(b"P5\n4 3\n255\n")
    magic, maxval, pixels = _read_pgm(path)
    assert magic == b"P5" and maxval == 255
    np.testing.assert_array_equal(pixels, image)
    with pytest.raises(TraverseError):
        write_pgm(tmp_path / "bad.pgm", image.astype(np.float64))


def test_run_traverse_writes_grid_and_index(tmp_path, tiny_model):
    spec = TraverseSpec(kind="single_dim", dim=2)
    codes = traverse_codes(spec, tiny_model.n_z)
    pgm, index = run_traverse(spec, tiny_model.decoder, tmp_path, codes)
    assert pgm.name == "traverse_single_dim_2.pgm"
    _, _, pixels = _read_pgm(pgm)
    assert pixels.shape == (10 * 4 + 11, 10 * 4 + 11)

    payload = json.loads(index.read_text())
    assert payload["rows"] == 10 and payload["cols"] == 10
    assert len(payload["tiles"]) == 100
    assert payload["tiles"][23] == {"tile": 23, "row": 2, "col": 3, "code": list(codes[23])}
    assert payload["spec"]["kind"] == "single_dim"


def test_run_traverse_is_deterministic(tmp_path, tiny_model):
    spec = TraverseSpec(kind="random_direction", seed=4, n_points=12)
    codes = traverse_codes(spec, tiny_model.n_z)
    first, _ = run_traverse(spec, tiny_model.decoder, tmp_path / "a", codes)
    second, _ = run_traverse(spec, tiny_model.decoder, tmp_path / "b", codes)
    assert first.read_bytes() == second.read_bytes()
