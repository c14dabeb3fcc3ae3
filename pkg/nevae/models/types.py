# nevae/models/types.py

from typing import List, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from nevae.autodiff import Tensor

Activation = Literal["linear", "tanh", "relu", "sigmoid"]


class ModelConfig(BaseModel):
    """Architecture of the MLP encoder/decoder pair."""

    n_z: int = Field(default=32, ge=1, description="Latent dimension count.")
    encoder_hidden: List[int] = Field(default_factory=lambda: [512, 512], description="Hidden widths of the encoder.")
    decoder_hidden: List[int] = Field(default_factory=lambda: [512, 512], description="Hidden widths of the decoder.")
    hidden_activation: Activation = Field(default="tanh", description="Activation applied after every hidden layer.")
    zero_init_encoder_head: bool = Field(
        default=False,
        description="Start the encoder's output layer at zero so q(z|x) equals the prior before training.",
    )

    @field_validator("encoder_hidden", "decoder_hidden", mode="before")
    @classmethod
    def _parse_widths(cls, value):
        # Flat config files spell widths "512,512"; an empty string means no hidden layer.
        if isinstance(value, str):
            return [int(part) for part in value.split(",") if part.strip()]
        return value

    @model_validator(mode="after")
    def _positive_widths(self):
        if any(w < 1 for w in self.encoder_hidden + self.decoder_hidden):
            raise ValueError("hidden widths must be positive")
        return self


class MLPParams(BaseModel):
    """Ordered dense layers: weights [fan_in, fan_out], biases [fan_out], one activation per layer."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    weights: List[Tensor]
    biases: List[Tensor]
    activations: List[Activation]

    @model_validator(mode="after")
    def _layers_chain(self):
        if not self.weights or not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise ValueError("weights, biases and activations must be non-empty and equally long")
        previous = None
        for index, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer {index}: weight {w.shape} and bias {b.shape} do not form a dense layer")
            if previous is not None and w.shape[0] != previous:
                raise ValueError(f"layer {index}: fan_in {w.shape[0]} does not match previous width {previous}")
            previous = w.shape[1]
        return self

    @property
    def in_width(self) -> int:
        return self.weights[0].shape[0]

    @property
    def out_width(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def widths(self) -> List[int]:
        return [self.in_width] + [w.shape[1] for w in self.weights]

    def parameters(self) -> List[Tensor]:
        params: List[Tensor] = []
        for w, b in zip(self.weights, self.biases):
            params.extend((w, b))
        return params


class EncoderParams(MLPParams):
    n_z: int = Field(ge=1)

    @model_validator(mode="after")
    def _two_heads(self):
        if self.out_width != 2 * self.n_z:
            raise ValueError(f"encoder output width {self.out_width} != 2 * n_z ({2 * self.n_z})")
        return self


class DecoderParams(MLPParams):
    @property
    def n_z(self) -> int:
        return self.in_width

    @property
    def pixels(self) -> int:
        return self.out_width

    def mean(self, z: Tensor) -> Tensor:
        """Bernoulli means p(x|z) for a batch of codes."""
        from nevae.models.networks import decode

        return decode(z, self).probs


class GaussianCode(BaseModel):
    """Diagonal Gaussian q(z|x) for a batch plus one reparameterized draw."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    mu: Tensor
    log_var: Tensor
    z: Tensor
    eps: np.ndarray = Field(description="Standard normal noise used to draw z.")
    n_z: int

    @model_validator(mode="after")
    def _shapes_agree(self):
        if not (self.mu.shape == self.log_var.shape == self.z.shape == self.eps.shape):
            raise ValueError("mu, log_var, z and eps must share one shape")
        if self.mu.shape[-1] != self.n_z:
            raise ValueError(f"code width {self.mu.shape[-1]} != n_z {self.n_z}")
        return self


class Reconstruction(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    logits: Tensor
    probs: Tensor


class VAEModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    encoder: EncoderParams
    decoder: DecoderParams

    @model_validator(mode="after")
    def _encoder_decoder_agree(self):
        if self.encoder.n_z != self.decoder.n_z:
            raise ValueError(f"encoder n_z {self.encoder.n_z} != decoder input width {self.decoder.n_z}")
        if self.encoder.in_width != self.decoder.pixels:
            raise ValueError(f"encoder input width {self.encoder.in_width} != decoder output width {self.decoder.pixels}")
        return self

    @property
    def n_z(self) -> int:
        return self.encoder.n_z

    @property
    def pixels(self) -> int:
        return self.decoder.pixels

    def parameters(self) -> List[Tensor]:
        return self.encoder.parameters() + self.decoder.parameters()

    def encoder_slots(self) -> List[int]:
        return list(range(len(self.encoder.parameters())))

    def decoder_slots(self) -> List[int]:
        offset = len(self.encoder.parameters())
        return list(range(offset, offset + len(self.decoder.parameters())))

    def clone(self) -> "VAEModel":
        """Deep copy of the parameter values; the copy shares no buffers with this model."""

        def copy_mlp(params: MLPParams, cls, **extra):
            return cls(
                weights=[Tensor(w.data.copy(), requires_grad=w.requires_grad) for w in params.weights],
                biases=[Tensor(b.data.copy(), requires_grad=b.requires_grad) for b in params.biases],
                activations=list(params.activations),
                **extra,
            )

        return VAEModel(
            encoder=copy_mlp(self.encoder, EncoderParams, n_z=self.encoder.n_z),
            decoder=copy_mlp(self.decoder, DecoderParams),
        )
