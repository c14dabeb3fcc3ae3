# nevae/training/types.py

from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from nevae.losses import LossConfig
from nevae.metrics import DiagnosticsReport, EvalConfig
from nevae.models import ModelConfig


class TrainConfig(BaseModel):
    """
    One training run. Every entry of the baseline matrix is a TrainConfig:

    - vanilla: loss.variant="vanilla" (annealed by default)
    - vanilla, no anneal: loss.anneal=None
    - beta-VAE: loss.variant="beta", loss.beta=0.2
    - aggressive: aggressive=True (with or without loss.anneal)
    - NE-VAE se / lp(c): loss.variant="ne_se" / "ne_lp", loss.cap_c=c
    """

    epochs: int = Field(default=100, ge=0, description="Full passes over the data; 0 returns the initial model.")
    batch_size: int = Field(default=100, ge=1)
    lr: float = Field(default=1e-3, gt=0.0, description="Constant Adam step size.")
    seed: int = Field(default=0, description="Root of the init, shuffle and noise streams.")
    model: ModelConfig = Field(default_factory=ModelConfig)
    loss: LossConfig = Field(default_factory=LossConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)

    aggressive: bool = Field(default=False, description="Run encoder-only inner loops before each joint update.")
    aggressive_max_inner: int = Field(default=100, ge=1)
    aggressive_stop_window: int = Field(default=10, ge=1)
    reset_adam_after_aggressive: bool = Field(
        default=False,
        description="Zero the shared Adam moments when the aggressive phase switches off.",
    )

    eval_every: int = Field(default=1, ge=0, description="Diagnostics snapshot cadence in epochs; 0 = final epoch only.")
    eval_max_items: int = Field(default=1000, ge=2, description="Items used for per-epoch snapshots and the re-encoding curve.")
    checkpoint_every: int = Field(default=0, ge=0, description="Checkpoint cadence in epochs; 0 = final checkpoint only.")
    progress: bool = Field(default=False, description="Show a tqdm progress bar over epochs.")

    @model_validator(mode="after")
    def _aggressive_window(self):
        if self.aggressive_stop_window > self.aggressive_max_inner:
            self.aggressive_stop_window = self.aggressive_max_inner
        return self


class EpochRecord(BaseModel):
    epoch: int = Field(description="1-based index of the completed epoch.")
    kl_weight: float
    recon_nll: float = Field(description="Batch-mean reconstruction NLL averaged over the epoch.")
    kl: float
    ne_term: float
    total: float
    reencode_se: float = Field(description="Mean ||z - z_hat||^2 on the monitor subset after the epoch.")
    aggressive: bool = False
    mean_inner_steps: float = 0.0
    diagnostics: Optional[DiagnosticsReport] = None


class RunLog(BaseModel):
    run_id: str = ""
    config: Optional[TrainConfig] = None
    epochs: List[EpochRecord] = Field(default_factory=list)
    aggressive_switch_epoch: Optional[int] = Field(
        default=None,
        description="Epoch after which the aggressive phase stopped (None if it never ran or never stopped).",
    )

    def reencode_curve(self) -> List[float]:
        return [record.reencode_se for record in self.epochs]

    def snapshots(self) -> List[EpochRecord]:
        return [record for record in self.epochs if record.diagnostics is not None]
