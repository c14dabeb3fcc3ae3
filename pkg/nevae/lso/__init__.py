from nevae.lso.benchmark import (
    check_compatible,
    lso_benchmark,
    pairwise_sq_distances,
    random_inits,
    select_targets,
    write_lso_csvs,
)
from nevae.lso.optimize import freeze, lso_optimize, lso_trajectory
from nevae.lso.types import (
    DEFAULT_THRESHOLDS,
    FrozenDecoder,
    LsoBenchmarkConfig,
    LsoConfig,
    LsoReport,
    LsoSummaryRow,
    LsoTrace,
)

__all__ = [
    "DEFAULT_THRESHOLDS",
    "FrozenDecoder",
    "LsoBenchmarkConfig",
    "LsoConfig",
    "LsoReport",
    "LsoSummaryRow",
    "LsoTrace",
    "check_compatible",
    "freeze",
    "lso_benchmark",
    "lso_optimize",
    "lso_trajectory",
    "pairwise_sq_distances",
    "random_inits",
    "select_targets",
    "write_lso_csvs",
]
