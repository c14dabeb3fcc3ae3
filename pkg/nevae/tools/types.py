# nevae/tools/types.py

from typing import Any, Dict

from pydantic import BaseModel, Field


class RunManifest(BaseModel):
    """Written to <run_dir>/manifest.json before any work starts."""

    run_id: str
    command: str = Field(description="Subcommand that produced the run directory.")
    config: Dict[str, Any] = Field(description="Fully resolved effective configuration.")
    dataset_fingerprint: str = Field(description="SHA-256 over the dataset pixels and labels.")
    seed: int
    artifacts: Dict[str, str] = Field(default_factory=dict, description="Artifact name -> path relative to the run dir.")
