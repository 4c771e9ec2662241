# store/manifest.py
"""Run manifest: the single place where run metadata is written"""

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional, Sequence, Union

from pydantic import ValidationError

from configs import RUN_ENV
from fsi import __version__
from fsi.errors import ConfigValidationError, StorageError
from schema import ConfigFile, IntegratorSettings, RunManifest

MANIFEST_FILE = "manifest.json"


def build_manifest(
    command: str,
    config: Optional[ConfigFile],
    settings: Optional[IntegratorSettings],
    outputs: Sequence[Union[str, Path]],
    runtime_s: float,
    extras: Optional[dict[str, Any]] = None,
) -> RunManifest:
    return RunManifest(
        tool_version=__version__,
        environment=RUN_ENV,
        command=command,
        config=config.echo() if config is not None else {},
        settings=settings.model_dump(mode="json") if settings is not None else {},
        outputs=tuple(Path(path).name for path in outputs),
        runtime_s=runtime_s,
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        extras=extras or {},
    )


def write_manifest(manifest: RunManifest, out_dir: Union[str, Path]) -> Path:
    path = Path(out_dir) / MANIFEST_FILE
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps(manifest.model_dump(mode="json"), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    except OSError as exc:
        raise StorageError(exc.strerror or str(exc), str(path)) from exc
    return path


def read_manifest(path: Union[str, Path]) -> RunManifest:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise StorageError(exc.strerror or str(exc), str(path)) from exc
    try:
        return RunManifest.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigValidationError(
            str(exc), field=".".join(map(str, first["loc"])), constraint=first["msg"]
        ) from exc
