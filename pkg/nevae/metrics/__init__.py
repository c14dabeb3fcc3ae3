from nevae.metrics.diagnostics import (
    active_units,
    activity,
    evaluate,
    mutual_information,
    posterior_params,
    reencode_error,
)
from nevae.metrics.types import AU_THRESHOLD, DiagnosticsReport, EvalConfig
from nevae.metrics.writers import append_metrics_csv, write_activity_csv, write_report_json

__all__ = [
    "AU_THRESHOLD",
    "DiagnosticsReport",
    "EvalConfig",
    "active_units",
    "activity",
    "append_metrics_csv",
    "evaluate",
    "mutual_information",
    "posterior_params",
    "reencode_error",
    "write_activity_csv",
    "write_report_json",
]
