from nevae.models.checkpoint import checkpoint_bytes, load_checkpoint, save_checkpoint
from nevae.models.networks import decode, encode, gaussian_code, init_model, mlp_forward, reencode
from nevae.models.types import (
    DecoderParams,
    EncoderParams,
    GaussianCode,
    ModelConfig,
    Reconstruction,
    VAEModel,
)

__all__ = [
    "DecoderParams",
    "EncoderParams",
    "GaussianCode",
    "ModelConfig",
    "Reconstruction",
    "VAEModel",
    "checkpoint_bytes",
    "decode",
    "encode",
    "gaussian_code",
    "init_model",
    "load_checkpoint",
    "mlp_forward",
    "reencode",
    "save_checkpoint",
]
