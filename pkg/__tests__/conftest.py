"""Shared fixtures of the rebound-lab tests"""

import io
import json
from pathlib import Path

import pytest
from rich.console import Console

from configs import PRESETS_DIR
from fsi import presets
from runners import Reporter


@pytest.fixture
def console() -> Console:
    """Console writing into a buffer so tests can read what was printed"""
    return Console(file=io.StringIO(), width=140, color_system=None)


@pytest.fixture
def reporter(console: Console) -> Reporter:
    return Reporter(console=console)


@pytest.fixture
def preset_path():
    def resolve(name: str) -> Path:
        return PRESETS_DIR / name

    return resolve


@pytest.fixture
def write_config(tmp_path: Path):
    """Write a dict as a JSON config file and return its path"""

    def write(payload: dict, name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return write


@pytest.fixture
def canonical_config() -> dict:
    return {
        "M": 1.0, "m": 8.2, "k": 10000.0,
        "c1": 0.1, "c2": 20.0, "c3": 7.4,
        "mu": 0.1, "h0": 0.3, "hdot0": -0.5,
        "xi0": 0.0, "xidot0": 0.0, "t_end": 2.0,
    }


@pytest.fixture
def rigid_body_config():
    return presets.rigid_body_config()
