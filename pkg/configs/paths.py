# configs/paths.py
"""
Path Configuration

Project directory structure and file paths.
"""

import os
from pathlib import Path


# ==================== Project Paths ====================
PROJECT_ROOT = Path(__file__).parent.parent
PRESETS_DIR = PROJECT_ROOT / "presets"
RUNS_DIR = Path(os.getenv("REBOUND_RUNS_DIR", str(PROJECT_ROOT / "runs")))
