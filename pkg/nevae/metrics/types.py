# nevae/metrics/types.py

from typing import List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

AU_THRESHOLD = 0.01


class EvalConfig(BaseModel):
    """Estimator settings for the diagnostics suite. Defaults are our choices, not published values."""

    seed: int = Field(default=20240, description="Fixed evaluation seed; every noise draw derives from it.")
    batch_size: int = Field(default=500, ge=1)
    max_items: Optional[int] = Field(default=None, ge=2, description="Evaluate on a deterministic subset of this size.")
    mi_samples: int = Field(default=1, ge=1, description="z draws per datum for the aggregated-posterior term.")
    mi_max_items: int = Field(default=2048, ge=1, description="Mixture components used for log q(z).")
    mi_estimator: Literal["control_variate", "direct"] = Field(
        default="control_variate",
        description=(
            "direct: closed-form KL minus MC[log q(z) - log p(z)]. control_variate: the same expectation with "
            "log q(z|x) as control variate, i.e. MC[log q(z|x) - log q(z)]."
        ),
    )
    au_threshold: float = Field(default=AU_THRESHOLD, ge=0.0)
    reencode_passes: int = Field(default=1, ge=1, description="Encode-decode-reencode passes over the data.")


class DiagnosticsReport(BaseModel):
    neg_elbo: float = Field(description="Single-sample reconstruction NLL plus closed-form KL, nats per image.")
    recon_nll: float
    kl: float
    mi: float = Field(description="Mutual information I_q between x and z.")
    agg_posterior_kl: float = Field(description="KL(q(z) || p(z)), the gap between KL and MI.")
    au_count: int
    activity: List[float] = Field(description="Per-dimension variance of posterior means.")
    mean_reencode_se: float
    mean_reencode_lp: float = Field(description="Uncapped Gaussian NLL of z under the re-encoded posterior.")
    au_threshold: float = AU_THRESHOLD
    n_items: int
    activity_defined: bool = Field(default=True, description="False for a single item; activity is then all zeros.")

    @model_validator(mode="after")
    def _au_matches_activity(self):
        expected = sum(1 for a in self.activity if a > self.au_threshold)
        if expected != self.au_count:
            raise ValueError(f"au_count {self.au_count} disagrees with activity ({expected} above threshold)")
        return self
