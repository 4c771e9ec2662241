"""
Configuration Module

Exports all configuration settings for the application.
"""

from configs.env import *
from configs.paths import *
from configs.numerics import *
from configs.experiment import *

__all__ = [
    # Environment
    "RUN_ENV",
    "LOG_LEVEL",
    "LOG_FORMAT",
    "LOG_DATE_FORMAT",
    # Paths
    "PROJECT_ROOT",
    "PRESETS_DIR",
    "RUNS_DIR",
    # Numerics
    "DEFAULT_REL_TOL",
    "DEFAULT_ABS_TOL",
    "DEFAULT_MAX_REJECTIONS",
    "DEFAULT_MAX_STEPS",
    "DEFAULT_QUAD_TOL",
    "EVENT_ROOT_TOL",
    "CSV_FLOAT_FORMAT",
    # Experiment
    "DEFAULT_MU_VALUES",
    "DEFAULT_T_END",
    "DEFAULT_AUDIT_GRID_SIZE",
    "PERSISTENCE_FRACTION",
    "VANISHING_FRACTION",
]
