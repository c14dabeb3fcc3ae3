from nevae.tools.artifacts import format_float, write_csv, write_json
from nevae.tools.run_dir import make_run_id, prepare_run_dir, run_root, write_manifest
from nevae.tools.types import RunManifest

__all__ = [
    "RunManifest",
    "format_float",
    "make_run_id",
    "prepare_run_dir",
    "run_root",
    "write_csv",
    "write_json",
    "write_manifest",
]
