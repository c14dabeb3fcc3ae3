# nevae/training/run_config.py

"""
Flat key-value run configs.

One ``key = value`` per line (``#`` comments allowed), keys are dotted paths
into TrainConfig::

    epochs = 100
    seed = 7
    model.n_z = 32
    model.encoder_hidden = 512,512
    loss.variant = ne_lp
    loss.cap_c = -1.0
    loss.anneal = 0.1,1.0,10
"""

import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Type, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ValidationError

from nevae.errors import ConfigError
from nevae.training.types import TrainConfig

logger = logging.getLogger(__name__)


def _model_class(annotation) -> Optional[Type[BaseModel]]:
    if isinstance(annotation, type) and issubclass(annotation, BaseModel):
        return annotation
    # Optional[Model]
    for arg in getattr(annotation, "__args__", ()):
        if isinstance(arg, type) and issubclass(arg, BaseModel):
            return arg
    return None


def _check_key(model_cls: Type[BaseModel], dotted: str) -> None:
    cls: Optional[Type[BaseModel]] = model_cls
    parts = dotted.split(".")
    for index, part in enumerate(parts):
        if cls is None or part not in cls.model_fields:
            raise ConfigError(f"unknown config key {dotted!r}")
        if index < len(parts) - 1:
            cls = _model_class(cls.model_fields[part].annotation)


def _nest(flat: Mapping[str, Any]) -> Dict[str, Any]:
    nested: Dict[str, Any] = {}
    for dotted, value in flat.items():
        node = nested
        *parents, leaf = dotted.split(".")
        for part in parents:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"config key {dotted!r} conflicts with a scalar value for {part!r}")
            node = child
        node[leaf] = value
    return nested


def _merge(base: Dict[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value
    return base


def apply_overrides(config: TrainConfig, overrides: Mapping[str, Any]) -> TrainConfig:
    """Return a new TrainConfig with dotted-key overrides applied and re-validated."""
    for key in overrides:
        _check_key(TrainConfig, key)
    merged = _merge(config.model_dump(), _nest(overrides))
    try:
        return TrainConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e


def load_run_config(path: Union[str, Path], overrides: Optional[Mapping[str, Any]] = None) -> TrainConfig:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"run config not found: {path}")
    flat = {key.strip(): value for key, value in dotenv_values(path).items()}
    missing = [key for key, value in flat.items() if value is None]
    if missing:
        raise ConfigError(f"{path}: keys without a value: {', '.join(missing)}")
    for key in flat:
        _check_key(TrainConfig, key)
    try:
        config = TrainConfig.model_validate(_nest(flat))
    except ValidationError as e:
        raise ConfigError(f"{path}: invalid configuration: {e}") from e
    logger.info(f"Loaded run config {path} ({len(flat)} keys)")
    if overrides:
        config = apply_overrides(config, overrides)
    return config
