# store/config_loader.py
"""
JSON config ingestion.

A config file is validated against `schema.ConfigFile`; an emitted
manifest.json is accepted too and its `config` echo is loaded, so a run can
be reproduced from its manifest alone.
"""

import json
from pathlib import Path
from typing import Any, Union

from pydantic import ValidationError

from fsi.errors import ConfigParseError, ConfigValidationError, StorageError
from fsi.log import get_logger
from schema import ConfigFile, ModelConfig, SweepConfig

logger = get_logger(__name__)


def _validation_error(exc: ValidationError) -> ConfigValidationError:
    first = exc.errors()[0]
    field = ".".join(str(part) for part in first.get("loc", ()))
    constraint = first.get("msg", "invalid value")
    return ConfigValidationError(str(exc), field=field, constraint=constraint)


def parse_config_text(text: str, source: str = "<config>") -> ConfigFile:
    try:
        raw: Any = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(exc.msg, source, exc.lineno, exc.colno) from exc

    if isinstance(raw, dict) and "manifest_version" in raw and "config" in raw:
        logger.debug("%s is a run manifest, loading its config echo", source)
        raw = raw["config"]
    if not isinstance(raw, dict):
        raise ConfigValidationError(
            "top level must be an object", field="", constraint="expected a JSON object"
        )

    try:
        return ConfigFile.model_validate(raw)
    except ValidationError as exc:
        raise _validation_error(exc) from exc


def load_config_file(path: Union[str, Path]) -> ConfigFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StorageError(exc.strerror or str(exc), str(path)) from exc
    return parse_config_text(text, str(path))


def resolve(config: ConfigFile) -> Union[ModelConfig, SweepConfig]:
    """ModelConfig for a single run, SweepConfig when mu_values is present"""
    try:
        return config.to_sweep_config() if config.is_sweep else config.to_model_config()
    except ValidationError as exc:
        raise _validation_error(exc) from exc


def resolve_model(config: ConfigFile) -> ModelConfig:
    """ModelConfig of a single run; mu_values, if present, is ignored"""
    try:
        return config.to_model_config()
    except ValidationError as exc:
        raise _validation_error(exc) from exc


def apply_overrides(config: ConfigFile, **overrides: Any) -> ConfigFile:
    """Config with command-line overrides folded in; None means not given"""
    given = {key: value for key, value in overrides.items() if value is not None}
    if not given:
        return config
    try:
        return ConfigFile.model_validate({**config.model_dump(), **given})
    except ValidationError as exc:
        raise _validation_error(exc) from exc


def load_config(path: Union[str, Path]) -> Union[ModelConfig, SweepConfig]:
    return resolve(load_config_file(path))
