# nevae/training/writers.py

from pathlib import Path
from typing import Dict

from nevae.metrics.writers import ACTIVITY_HEADER, METRICS_HEADER, activity_rows, metrics_row
from nevae.tools import write_csv, write_json
from nevae.training.types import RunLog

LOSSES_HEADER = ("run_id", "epoch", "kl_weight", "recon_nll", "kl", "ne_term", "total", "aggressive", "mean_inner_steps")
REENCODE_HEADER = ("run_id", "epoch", "reencode_se")


def write_run_log(run_dir: Path, log: RunLog) -> Dict[str, str]:
    """runlog.json plus CSV views; returns artifact name -> path relative to run_dir."""
    run_dir = Path(run_dir)
    run_id = log.run_id
    write_json(run_dir / "runlog.json", log)
    write_csv(
        run_dir / "losses.csv",
        LOSSES_HEADER,
        [
            (run_id, r.epoch, r.kl_weight, r.recon_nll, r.kl, r.ne_term, r.total, r.aggressive, r.mean_inner_steps)
            for r in log.epochs
        ],
    )
    write_csv(run_dir / "reencode.csv", REENCODE_HEADER, [(run_id, r.epoch, r.reencode_se) for r in log.epochs])

    snapshots = log.snapshots()
    write_csv(run_dir / "metrics.csv", METRICS_HEADER, [metrics_row(run_id, r.epoch, r.diagnostics) for r in snapshots])
    activity = []
    for record in snapshots:
        activity.extend((run_id, *row) for row in activity_rows(record.epoch, record.diagnostics))
    write_csv(run_dir / "activity.csv", ACTIVITY_HEADER, activity)
    return {
        "runlog": "runlog.json",
        "losses": "losses.csv",
        "reencode": "reencode.csv",
        "metrics": "metrics.csv",
        "activity": "activity.csv",
    }
