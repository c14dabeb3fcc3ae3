# nevae/lso/types.py

import math
from typing import List, Literal, Optional, Protocol, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from nevae.autodiff import Tensor

InitKind = Literal["random_prior", "encoder_mean"]

DEFAULT_THRESHOLDS = [0.01, 0.005, 0.001, 0.0]


class FrozenDecoder(Protocol):
    """Anything that maps a [batch, n_z] code tensor to [batch, pixels] means."""

    def mean(self, z: Tensor) -> Tensor: ...

    def parameters(self) -> List[Tensor]: ...


class LsoConfig(BaseModel):
    n_targets: int = Field(default=50, ge=1)
    init: InitKind = "random_prior"
    stop_threshold: float = Field(default=0.0, ge=0.0, description="A step whose absolute loss change is below this counts as stalled.")
    stop_window: int = Field(default=10, ge=1, description="Consecutive stalled steps before stopping.")
    max_iters: int = Field(default=50000, ge=1)
    lr: float = Field(default=1e-3, gt=0.0)
    seed: int = 0


class LsoBenchmarkConfig(BaseModel):
    n_targets: int = Field(default=50, ge=1)
    thresholds: List[float] = Field(default_factory=lambda: list(DEFAULT_THRESHOLDS))
    n_random_inits: int = Field(default=2, ge=0, description="Prior draws per target.")
    include_encoder_mean: bool = Field(default=True, description="Also start from the encoder's posterior mean.")
    stop_window: int = Field(default=10, ge=1)
    max_iters: int = Field(default=50000, ge=1)
    lr: float = Field(default=1e-3, gt=0.0)
    seed: int = 0
    workers: int = Field(default=1, ge=1, description="Threads running targets in parallel.")

    @field_validator("thresholds", mode="before")
    @classmethod
    def _parse_thresholds(cls, value):
        if isinstance(value, str):
            value = [part for part in value.split(",") if part.strip()]
        return value

    @field_validator("thresholds")
    @classmethod
    def _nonnegative(cls, value):
        if not value:
            raise ValueError("at least one threshold is required")
        if any(t < 0 or math.isnan(t) for t in value):
            raise ValueError("thresholds must be >= 0")
        return sorted(set(value), reverse=True)

    def init_kinds(self) -> List[str]:
        kinds = [f"random_prior_{i}" for i in range(self.n_random_inits)]
        if self.include_encoder_mean:
            kinds.append("encoder_mean")
        return kinds


class LsoTrace(BaseModel):
    """One optimization trial for one stopping threshold."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    target_id: int = 0
    init_kind: str = "random_prior"
    threshold: float
    iterations: int = Field(description="Adam steps taken before stopping.")
    stopped: bool = Field(description="False when max_iters was reached first.")
    loss_curve: List[float] = Field(description="Loss at the initial code and after every step; length iterations + 1.")
    initial_code: np.ndarray
    final_code: np.ndarray
    final_loss: float
    best_loss: float

    @property
    def initial_loss(self) -> float:
        return self.loss_curve[0]


class LsoTrialRow(BaseModel):
    model_id: str
    target_id: int
    init_kind: str
    threshold: float
    iterations: int
    stopped: bool
    initial_loss: float
    final_loss: float
    best_loss: float


class LsoPairRow(BaseModel):
    model_id: str
    threshold: float
    target_id: int
    init_a: str
    init_b: str
    sq_distance: float


class LsoSummaryRow(BaseModel):
    model_id: str
    threshold: float
    init_kind: str = Field(description="Initialization group: random_prior, encoder_mean or all.")
    n_trials: int
    mean_iterations: float
    median_iterations: float
    mean_final_loss: float
    final_loss_spread: Optional[float] = Field(
        default=None,
        description="Mean over targets of max - min final loss across initializations.",
    )
    mean_pairwise_distance: Optional[float] = Field(
        default=None,
        description="Mean squared distance between final codes of different inits of one target.",
    )


class LsoReport(BaseModel):
    target_ids: List[int]
    trials: List[LsoTrialRow] = Field(default_factory=list)
    pairs: List[LsoPairRow] = Field(default_factory=list)
    summary: List[LsoSummaryRow] = Field(default_factory=list)
    skipped: List[str] = Field(default_factory=list, description="Trials aborted on a non-finite loss.")

    def summary_for(self, model_id: str, threshold: float, init_kind: str = "all") -> Optional[LsoSummaryRow]:
        for row in self.summary:
            if row.model_id == model_id and row.threshold == threshold and row.init_kind == init_kind:
                return row
        return None


def as_code(values: Sequence[float]) -> np.ndarray:
    return np.asarray(values, dtype=np.float64).reshape(-1)
