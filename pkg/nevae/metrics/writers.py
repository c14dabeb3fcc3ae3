# nevae/metrics/writers.py

from pathlib import Path
from typing import Optional, Union

import numpy as np

from nevae.metrics.types import DiagnosticsReport
from nevae.tools import write_csv, write_json

METRICS_HEADER = ("run_id", "epoch", "neg_elbo", "kl", "mi", "au", "mean_reencode_se")
ACTIVITY_HEADER = ("run_id", "epoch", "dim", "activity", "rank")

PathLike = Union[str, Path]


def write_report_json(path: PathLike, report: DiagnosticsReport) -> Path:
    return write_json(path, report)


def metrics_row(run_id: str, epoch: Optional[int], report: DiagnosticsReport) -> tuple:
    return (
        run_id,
        "" if epoch is None else epoch,
        report.neg_elbo,
        report.kl,
        report.mi,
        report.au_count,
        report.mean_reencode_se,
    )


def append_metrics_csv(path: PathLike, run_id: str, epoch: Optional[int], report: DiagnosticsReport) -> Path:
    return write_csv(path, METRICS_HEADER, [metrics_row(run_id, epoch, report)], append=True)


def activity_rows(epoch: Optional[int], report: DiagnosticsReport):
    """One row per dimension; rank 0 is the most active dimension (ties to the lower index)."""
    order = np.argsort(-np.asarray(report.activity), kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return [
        ("" if epoch is None else epoch, dim, value, int(rank[dim]))
        for dim, value in enumerate(report.activity)
    ]


def write_activity_csv(
    path: PathLike,
    run_id: str,
    epoch: Optional[int],
    report: DiagnosticsReport,
    append: bool = False,
) -> Path:
    rows = [(run_id, *row) for row in activity_rows(epoch, report)]
    return write_csv(path, ACTIVITY_HEADER, rows, append=append)
