# nevae/losses/types.py

from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

Variant = Literal["vanilla", "beta", "ne_se", "ne_lp"]


class AnnealSchedule(BaseModel):
    """Linear KL-weight ramp from start_weight to end_weight over the first `epochs` epochs."""

    start_weight: float = Field(default=0.1, gt=0.0, le=1.0)
    end_weight: float = Field(default=1.0, gt=0.0, le=1.0)
    epochs: int = Field(default=10, ge=0)

    @model_validator(mode="after")
    def _nondecreasing(self):
        if self.start_weight > self.end_weight:
            raise ValueError("anneal start_weight must not exceed end_weight")
        return self


class LossConfig(BaseModel):
    variant: Variant = Field(default="vanilla", description="Training objective.")
    beta: float = Field(default=1.0, gt=0.0, description="KL weight of the beta-VAE objective.")
    cap_c: float = Field(
        default=0.0,
        description="Per-dimension cap of the log-probability re-encoding loss; terms below c are dropped.",
    )
    anneal: Optional[AnnealSchedule] = Field(
        default_factory=AnnealSchedule,
        description="KL annealing schedule; None trains without annealing.",
    )
    ne_weight: float = Field(default=1.0, ge=0.0, description="Multiplier on the re-encoding term.")
    binarize_reencode: bool = Field(
        default=False,
        description="Threshold reconstructions at 0.5 before re-encoding (cuts the gradient path).",
    )

    @field_validator("anneal", mode="before")
    @classmethod
    def _parse_anneal(cls, value):
        # Flat config files spell the schedule "start,end,epochs" or "none".
        if isinstance(value, str):
            text = value.strip().lower()
            if text in ("", "none", "off", "false"):
                return None
            parts = [p.strip() for p in text.split(",")]
            if len(parts) != 3:
                raise ValueError(f"anneal must be 'start,end,epochs' or 'none', got {value!r}")
            return {"start_weight": parts[0], "end_weight": parts[1], "epochs": parts[2]}
        return value


class LossReport(BaseModel):
    """Per-batch objective decomposition; total = recon_nll + kl_weight_applied * kl + ne_term."""

    recon_nll: float = Field(description="Bernoulli NLL, summed over pixels, mean over the batch.")
    kl: float = Field(description="KL to the prior, summed over dimensions, mean over the batch.")
    ne_term: float = Field(default=0.0, description="Weighted re-encoding loss (0 for vanilla and beta).")
    kl_weight_applied: float
    total: float
