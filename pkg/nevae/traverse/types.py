# nevae/traverse/types.py

from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

TraverseKind = Literal["single_dim", "random_direction"]


class TraverseSpec(BaseModel):
    kind: TraverseKind = "single_dim"
    dim: int = Field(default=0, ge=0, description="Traversed dimension (single_dim only).")
    n_points: int = Field(default=100, ge=2)
    lo: float = Field(default=-10.0, description="Start of the single_dim grid.")
    hi: float = Field(default=10.0, description="End of the single_dim grid.")
    radius: float = Field(default=10.0, gt=0.0, description="Distance from the origin of the random_direction endpoint.")
    zero_dims: List[int] = Field(default_factory=list, description="Dimensions held at 0 along a random direction.")
    seed: int = 0
    cols: Optional[int] = Field(default=None, ge=1, description="Grid columns; default min(10, n_points).")

    @field_validator("zero_dims")
    @classmethod
    def _distinct_nonnegative(cls, value):
        if any(d < 0 for d in value):
            raise ValueError("zero_dims must be non-negative")
        return sorted(set(value))

    @model_validator(mode="after")
    def _range_ordered(self):
        if self.lo >= self.hi:
            raise ValueError(f"lo ({self.lo}) must be below hi ({self.hi})")
        return self

    def layout(self) -> tuple:
        """(rows, cols) of the rendered grid."""
        cols = self.cols or min(10, self.n_points)
        return -(-self.n_points // cols), cols

    def filename(self) -> str:
        tag = self.dim if self.kind == "single_dim" else self.seed
        return f"traverse_{self.kind}_{tag}.pgm"
