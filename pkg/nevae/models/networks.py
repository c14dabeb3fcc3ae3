# nevae/models/networks.py

import logging
from typing import List, Sequence, Union

import numpy as np

from nevae.autodiff import Tensor, as_tensor, ops
from nevae.errors import ShapeError
from nevae.models.types import (
    Activation,
    DecoderParams,
    EncoderParams,
    GaussianCode,
    ModelConfig,
    Reconstruction,
    VAEModel,
)

logger = logging.getLogger(__name__)

_ACTIVATIONS = {
    "linear": lambda h: h,
    "tanh": ops.tanh,
    "relu": ops.relu,
    "sigmoid": ops.sigmoid,
}


def init_mlp_layers(
    widths: Sequence[int],
    activations: Sequence[Activation],
    rng: np.random.Generator,
    zero_final: bool = False,
):
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    weights: List[Tensor] = []
    biases: List[Tensor] = []
    for index, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
        bound = 1.0 / np.sqrt(fan_in)
        w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        if zero_final and index == len(widths) - 2:
            w = np.zeros_like(w)
        weights.append(Tensor(w, requires_grad=True, name=f"w{index}"))
        biases.append(Tensor(np.zeros(fan_out), requires_grad=True, name=f"b{index}"))
    return weights, biases, list(activations)


def init_model(config: ModelConfig, pixels: int, seed: int) -> VAEModel:
    rng = np.random.default_rng(seed)
    hidden = config.hidden_activation

    enc_widths = [pixels, *config.encoder_hidden, 2 * config.n_z]
    enc_acts = [hidden] * len(config.encoder_hidden) + ["linear"]
    w, b, acts = init_mlp_layers(enc_widths, enc_acts, rng, zero_final=config.zero_init_encoder_head)
    encoder = EncoderParams(weights=w, biases=b, activations=acts, n_z=config.n_z)

    dec_widths = [config.n_z, *config.decoder_hidden, pixels]
    dec_acts = [hidden] * len(config.decoder_hidden) + ["linear"]
    w, b, acts = init_mlp_layers(dec_widths, dec_acts, rng)
    decoder = DecoderParams(weights=w, biases=b, activations=acts)

    logger.info(f"Initialized model: encoder {enc_widths}, decoder {dec_widths}, seed {seed}")
    return VAEModel(encoder=encoder, decoder=decoder)


def mlp_forward(params, x: Tensor) -> Tensor:
    h = x
    for w, b, activation in zip(params.weights, params.biases, params.activations):
        h = _ACTIVATIONS[activation](ops.add(ops.matmul(h, w), b))
    return h


def _as_batch(op: str, x: Union[Tensor, np.ndarray], width: int) -> Tensor:
    x = as_tensor(x)
    if x.ndim != 2 or x.shape[1] != width:
        raise ShapeError(op, x.shape, (x.shape[0] if x.ndim else 0, width), "input width mismatch")
    return x


def gaussian_code(mu: Tensor, log_var: Tensor, rng: np.random.Generator) -> GaussianCode:
    """Reparameterized draw z = mu + exp(0.5 * log_var) * eps."""
    eps = rng.standard_normal(mu.shape)
    z = ops.add(mu, ops.mul(ops.exp(ops.mul(log_var, 0.5)), eps))
    return GaussianCode(mu=mu, log_var=log_var, z=z, eps=eps, n_z=mu.shape[1])


def encode(x: Union[Tensor, np.ndarray], params: EncoderParams, rng: np.random.Generator) -> GaussianCode:
    x = _as_batch("encode", x, params.in_width)
    out = mlp_forward(params, x)
    mu = ops.slice_axis(out, 0, params.n_z, axis=1)
    log_var = ops.slice_axis(out, params.n_z, 2 * params.n_z, axis=1)
    return gaussian_code(mu, log_var, rng)


def decode(z: Union[Tensor, np.ndarray], params: DecoderParams) -> Reconstruction:
    z = _as_batch("decode", z, params.n_z)
    logits = mlp_forward(params, z)
    return Reconstruction(logits=logits, probs=ops.sigmoid(logits))


def reencode(
    recon: Reconstruction,
    params: EncoderParams,
    rng: np.random.Generator,
    binarize: bool = False,
) -> GaussianCode:
    """
    Encode the decoder's reconstruction again.

    The re-encoder sees the Bernoulli means so gradients reach both networks.
    With ``binarize`` the means are thresholded at 0.5 and the path is cut.
    """
    source = recon.probs
    if binarize:
        source = Tensor((recon.probs.data >= 0.5).astype(np.float64))
    return encode(source, params, rng)
