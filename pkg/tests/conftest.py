# tests/conftest.py

import numpy as np
import pytest

from nevae.autodiff import Tensor
from nevae.data import Dataset, SyntheticSpec, make_synthetic, save_idx
from nevae.models import DecoderParams, EncoderParams, ModelConfig, VAEModel, init_model


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config():
    return ModelConfig(n_z=3, encoder_hidden=[8], decoder_hidden=[8])


@pytest.fixture
def tiny_dataset():
    return make_synthetic(SyntheticSpec(intrinsic_dim=2, ambient_dim=16, n_samples=64, seed=3))


@pytest.fixture
def tiny_model(tiny_config):
    return init_model(tiny_config, pixels=16, seed=0)


def make_collapsed_model(n_z: int, pixels: int, hidden: int = 8, seed: int = 0) -> VAEModel:
    """Encoder head at zero: q(z|x) = N(0, I) for every input."""
    config = ModelConfig(n_z=n_z, encoder_hidden=[hidden], decoder_hidden=[hidden], zero_init_encoder_head=True)
    return init_model(config, pixels=pixels, seed=seed)


@pytest.fixture
def collapsed_model():
    return make_collapsed_model(n_z=4, pixels=16)


def make_linear_model(weight: np.ndarray, log_var: float) -> VAEModel:
    """
    Single-layer encoder and decoder with identity-like maps.

    Encoder: mu = x @ weight, log_var constant. Decoder: logits = z @ weight.T.
    """
    pixels, n_z = weight.shape
    enc_w = np.concatenate([weight, np.zeros((pixels, n_z))], axis=1)
    enc_b = np.concatenate([np.zeros(n_z), np.full(n_z, log_var)])
    encoder = EncoderParams(
        weights=[Tensor(enc_w, requires_grad=True)],
        biases=[Tensor(enc_b, requires_grad=True)],
        activations=["linear"],
        n_z=n_z,
    )
    decoder = DecoderParams(
        weights=[Tensor(weight.T.copy(), requires_grad=True)],
        biases=[Tensor(np.zeros(pixels), requires_grad=True)],
        activations=["linear"],
    )
    return VAEModel(encoder=encoder, decoder=decoder)


@pytest.fixture
def idx_files(tmp_path, tiny_dataset):
    images = tmp_path / "images.idx"
    labels = tmp_path / "labels.idx"
    labelled = Dataset(
        images=tiny_dataset.images,
        image_side=4,
        labels=np.arange(tiny_dataset.n) % 4,
    )
    save_idx(labelled, images, labels)
    return images, labels
