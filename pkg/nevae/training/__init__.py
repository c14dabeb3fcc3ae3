from nevae.training.aggressive import AggressiveSchedule, aggressive_inner_loop
from nevae.training.run_config import apply_overrides, load_run_config
from nevae.training.trainer import train, train_aggressive
from nevae.training.types import EpochRecord, RunLog, TrainConfig
from nevae.training.writers import write_run_log

__all__ = [
    "AggressiveSchedule",
    "EpochRecord",
    "RunLog",
    "TrainConfig",
    "aggressive_inner_loop",
    "apply_overrides",
    "load_run_config",
    "train",
    "train_aggressive",
    "write_run_log",
]
