# nevae/tools/run_dir.py

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

from nevae.tools.artifacts import write_json
from nevae.tools.types import RunManifest

logger = logging.getLogger(__name__)

DEFAULT_RUN_ROOT = "runs"


def run_root(override: Optional[str] = None) -> Path:
    """Output root: explicit override, else NEVAE_RUN_DIR, else ./runs."""
    return Path(override or os.getenv("NEVAE_RUN_DIR", DEFAULT_RUN_ROOT))


def make_run_id(prefix: str, config_snapshot: Dict[str, Any], fingerprint: str) -> str:
    """Deterministic id: identical config and data always map to the same directory."""
    digest = hashlib.sha256()
    digest.update(json.dumps(config_snapshot, sort_keys=True, default=str).encode())
    digest.update(fingerprint.encode())
    return f"{prefix}_{digest.hexdigest()[:10]}"


def prepare_run_dir(root: Path, run_id: str, checkpoints: bool = True) -> Path:
    run_dir = Path(root) / run_id
    (run_dir / "checkpoints" if checkpoints else run_dir).mkdir(parents=True, exist_ok=True)
    logger.info(f"Run directory: {run_dir}")
    return run_dir


def write_manifest(run_dir: Path, manifest: RunManifest) -> Path:
    return write_json(Path(run_dir) / "manifest.json", manifest)
