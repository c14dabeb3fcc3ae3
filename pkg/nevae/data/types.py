# nevae/data/types.py

import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

BinarizeMode = Literal["threshold", "stochastic"]


class Dataset(BaseModel):
    """Flattened images with values in [0, 1]; immutable once built."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    images: np.ndarray = Field(description="[N, pixels] float64 matrix.")
    image_side: Optional[int] = Field(default=None, description="Pixels per edge for square images.")
    labels: Optional[np.ndarray] = Field(default=None, description="Integer class label per image.")
    intrinsic_dim: Optional[int] = Field(default=None, description="Ground-truth latent dimension of synthetic data.")

    @field_validator("images", mode="before")
    @classmethod
    def _check_images(cls, value):
        images = np.asarray(value, dtype=np.float64)
        if images.ndim != 2 or images.shape[0] < 1:
            raise ValueError(f"images must be a non-empty [N, pixels] matrix, got shape {images.shape}")
        if not np.all(np.isfinite(images)):
            raise ValueError("pixel values must be finite")
        if images.size and (images.min() < 0.0 or images.max() > 1.0):
            raise ValueError("pixel values must lie in [0, 1]")
        return images

    @field_validator("labels", mode="before")
    @classmethod
    def _check_labels(cls, value):
        if value is None:
            return None
        return np.asarray(value, dtype=np.int64).reshape(-1)

    @model_validator(mode="after")
    def _consistent(self):
        if self.image_side is not None and self.image_side * self.image_side != self.pixels:
            raise ValueError(f"image_side {self.image_side} does not match {self.pixels} pixels")
        if self.labels is not None and self.labels.shape[0] != self.n:
            raise ValueError(f"{self.labels.shape[0]} labels for {self.n} images")
        return self

    @property
    def n(self) -> int:
        return int(self.images.shape[0])

    @property
    def pixels(self) -> int:
        return int(self.images.shape[1])

    def select(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            images=self.images[indices],
            image_side=self.image_side,
            labels=None if self.labels is None else self.labels[indices],
            intrinsic_dim=self.intrinsic_dim,
        )

    def with_images(self, images: np.ndarray) -> "Dataset":
        return Dataset(
            images=images,
            image_side=self.image_side,
            labels=self.labels,
            intrinsic_dim=self.intrinsic_dim,
        )


def square_side(pixels: int) -> Optional[int]:
    side = math.isqrt(pixels)
    return side if side * side == pixels else None


class SyntheticSpec(BaseModel):
    """Low-dimensional manifold pushed through sigmoid(factors @ W) into pixel space."""

    intrinsic_dim: int = Field(default=4, ge=1, description="Number of latent factors k.")
    ambient_dim: int = Field(default=784, ge=2, description="Pixel count D.")
    n_samples: int = Field(default=10000, ge=1)
    noise_sigma: float = Field(default=0.05, ge=0.0, description="Std of additive Gaussian pixel noise.")
    mapping_scale: float = Field(default=2.0, gt=0.0, description="Std of the random linear map entries.")
    seed: int = 0

    @model_validator(mode="after")
    def _k_below_d(self):
        if self.intrinsic_dim >= self.ambient_dim:
            raise ValueError("intrinsic_dim must be smaller than ambient_dim")
        return self
