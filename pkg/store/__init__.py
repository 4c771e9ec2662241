"""
Store Module

Config ingestion, CSV emission and run manifests.
"""

from store.config_loader import (
    apply_overrides,
    load_config,
    load_config_file,
    parse_config_text,
    resolve,
    resolve_model,
)
from store.csv_writer import (
    DRAG_TABLE_COLUMNS,
    SUMMARY_COLUMNS,
    TRAJECTORY_COLUMNS,
    emit_csv,
    emit_drag_table,
    emit_sweep,
    emit_trajectory,
    read_frame,
    read_trajectory,
    sweep_file_name,
)
from store.manifest import build_manifest, read_manifest, write_manifest

__all__ = [
    "load_config",
    "load_config_file",
    "parse_config_text",
    "resolve",
    "resolve_model",
    "apply_overrides",
    "TRAJECTORY_COLUMNS",
    "SUMMARY_COLUMNS",
    "DRAG_TABLE_COLUMNS",
    "emit_csv",
    "emit_trajectory",
    "emit_sweep",
    "emit_drag_table",
    "read_frame",
    "read_trajectory",
    "sweep_file_name",
    "build_manifest",
    "write_manifest",
    "read_manifest",
]
