# nevae/tools/artifacts.py

import csv
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

from pydantic import BaseModel

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_float(value: Any) -> str:
    """Six significant digits for floats; everything else via str()."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]], append: bool = False) -> Path:
    """Write (or append) rows; the header is written only when the file is new or empty."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    needs_header = not append or not path.exists() or path.stat().st_size == 0
    with path.open("a" if append else "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        if needs_header:
            writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([format_float(v) for v in row])
            count += 1
    logger.debug(f"Wrote {count} rows to {path}")
    return path


def write_json(path: PathLike, payload: Union[BaseModel, dict, list]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2)
    else:
        text = json.dumps(payload, indent=2, sort_keys=True)
    path.write_text(text + "\n")
    logger.debug(f"Wrote {path}")
    return path
