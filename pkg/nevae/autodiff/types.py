# nevae/autodiff/types.py

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class AdamState(BaseModel):
    """Adam moment buffers, one slot per parameter in declaration order."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    step: int = Field(default=0, ge=0, description="Number of updates applied so far.")
    m: List[np.ndarray] = Field(default_factory=list, description="First-moment buffer per parameter slot.")
    v: List[np.ndarray] = Field(default_factory=list, description="Second-moment buffer per parameter slot.")
    lr: float = Field(default=1e-3, gt=0.0, description="Step size.")
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    epsilon: float = Field(default=1e-8, gt=0.0)

    @field_validator("v")
    @classmethod
    def _moments_align(cls, v, info):
        m = info.data.get("m", [])
        if len(m) != len(v) or any(a.shape != b.shape for a, b in zip(m, v)):
            raise ValueError("first and second moment buffers must have matching shapes")
        return v
