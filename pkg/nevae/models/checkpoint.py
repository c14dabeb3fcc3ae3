# nevae/models/checkpoint.py

"""
Binary checkpoint container.

Layout (little-endian):
    magic           8 bytes  b"NEVAE001"
    n_z             uint32
    encoder layers  uint32 count, then per layer (fan_in uint32, fan_out uint32, activation uint8)
    decoder layers  same as encoder
    tensors         float64, encoder w0, b0, w1, b1, ... then decoder, row-major
"""

import logging
import struct
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from nevae.autodiff import Tensor
from nevae.errors import CheckpointError
from nevae.models.types import DecoderParams, EncoderParams, MLPParams, VAEModel

logger = logging.getLogger(__name__)

MAGIC = b"NEVAE001"
_ACTIVATION_CODES = {"linear": 0, "tanh": 1, "relu": 2, "sigmoid": 3}
_ACTIVATION_NAMES = {code: name for name, code in _ACTIVATION_CODES.items()}
_LAYER = struct.Struct("<IIB")
_U32 = struct.Struct("<I")


def _layer_header(params: MLPParams) -> bytes:
    parts = [_U32.pack(len(params.weights))]
    for w, activation in zip(params.weights, params.activations):
        parts.append(_LAYER.pack(w.shape[0], w.shape[1], _ACTIVATION_CODES[activation]))
    return b"".join(parts)


def checkpoint_bytes(model: VAEModel) -> bytes:
    parts = [MAGIC, _U32.pack(model.n_z), _layer_header(model.encoder), _layer_header(model.decoder)]
    for tensor in model.parameters():
        parts.append(np.ascontiguousarray(tensor.data, dtype="<f8").tobytes())
    return b"".join(parts)


def save_checkpoint(path: Union[str, Path], model: VAEModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_bytes(model))
    logger.info(f"Saved checkpoint to {path}")
    return path


class _Reader:
    def __init__(self, buffer: bytes, source: str):
        self.buffer = buffer
        self.offset = 0
        self.source = source

    def take(self, count: int) -> bytes:
        if self.offset + count > len(self.buffer):
            raise CheckpointError(
                f"{self.source}: truncated checkpoint (need {count} bytes at offset {self.offset}, "
                f"file has {len(self.buffer)})"
            )
        chunk = self.buffer[self.offset:self.offset + count]
        self.offset += count
        return chunk

    def unpack(self, fmt: struct.Struct) -> tuple:
        return fmt.unpack(self.take(fmt.size))


def _read_layers(reader: _Reader) -> List[Tuple[int, int, str]]:
    (count,) = reader.unpack(_U32)
    layers = []
    for _ in range(count):
        fan_in, fan_out, code = reader.unpack(_LAYER)
        if code not in _ACTIVATION_NAMES:
            raise CheckpointError(f"{reader.source}: unknown activation code {code}")
        layers.append((fan_in, fan_out, _ACTIVATION_NAMES[code]))
    return layers


def _read_tensors(reader: _Reader, layers: List[Tuple[int, int, str]]):
    weights, biases = [], []
    for fan_in, fan_out, _ in layers:
        w = np.frombuffer(reader.take(8 * fan_in * fan_out), dtype="<f8").reshape(fan_in, fan_out)
        b = np.frombuffer(reader.take(8 * fan_out), dtype="<f8")
        weights.append(Tensor(w.astype(np.float64), requires_grad=True))
        biases.append(Tensor(b.astype(np.float64), requires_grad=True))
    return weights, biases, [activation for _, _, activation in layers]


def load_checkpoint(path: Union[str, Path]) -> VAEModel:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    reader = _Reader(path.read_bytes(), str(path))
    magic = reader.take(len(MAGIC))
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad checkpoint magic {magic!r}, expected {MAGIC!r}")
    (n_z,) = reader.unpack(_U32)
    enc_layers = _read_layers(reader)
    dec_layers = _read_layers(reader)
    w, b, acts = _read_tensors(reader, enc_layers)
    try:
        encoder = EncoderParams(weights=w, biases=b, activations=acts, n_z=n_z)
        w, b, acts = _read_tensors(reader, dec_layers)
        decoder = DecoderParams(weights=w, biases=b, activations=acts)
        model = VAEModel(encoder=encoder, decoder=decoder)
    except ValueError as e:
        raise CheckpointError(f"{path}: inconsistent layer spec: {e}") from e
    if reader.offset != len(reader.buffer):
        raise CheckpointError(f"{path}: {len(reader.buffer) - reader.offset} trailing bytes after tensors")
    logger.info(f"Loaded checkpoint {path} (n_z={n_z}, pixels={model.pixels})")
    return model
