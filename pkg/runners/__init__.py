# runners/__init__.py
"""
Runners - orchestration behind the rebound-lab command line

Runners:
- BaseRunner - common base with status tracking and error mapping
- Protocol - RunTask / RunResponse records and exit codes
- Reporter - rich terminal output
- SimulateRunner, SweepRunner, DragTableRunner, AuditRunner, VerifyRunner
- LabManager - routes an action to its runner
"""

from .base import BaseRunner
from .protocol import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, EXIT_PROPERTY, RunResponse, RunTask
from .reporting import Reporter
from .simulate_runner import SimulateRunner
from .sweep_runner import SweepRunner
from .drag_table_runner import DragTableRunner
from .audit_runner import AuditRunner
from .verify_runner import VerifyRunner
from .lab_manager import LabManager

__all__ = [
    "BaseRunner",
    "RunTask",
    "RunResponse",
    "EXIT_OK",
    "EXIT_INPUT",
    "EXIT_NUMERICAL",
    "EXIT_PROPERTY",
    "Reporter",
    "SimulateRunner",
    "SweepRunner",
    "DragTableRunner",
    "AuditRunner",
    "VerifyRunner",
    "LabManager",
]
