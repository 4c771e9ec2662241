# runners/lab_manager.py
"""
LabManager - routes CLI actions to their runners

actions: simulate, sweep, drag_table, audit, verify
"""

from typing import Any, Dict, List, Optional

from .audit_runner import AuditRunner
from .base import BaseRunner
from .drag_table_runner import DragTableRunner
from .protocol import EXIT_INPUT, RunResponse, RunTask
from .reporting import Reporter
from .simulate_runner import SimulateRunner
from .sweep_runner import SweepRunner
from .verify_runner import VerifyRunner


class LabManager(BaseRunner):
    """Owns one runner per action and keeps the history of responses"""

    def __init__(self, reporter: Optional[Reporter] = None):
        reporter = reporter or Reporter()
        super().__init__(name="LabManager", description="Routes lab actions to runners", reporter=reporter)

        self.runners: Dict[str, BaseRunner] = {
            "simulate": SimulateRunner(reporter),
            "sweep": SweepRunner(reporter),
            "drag_table": DragTableRunner(reporter),
            "audit": AuditRunner(reporter),
            "verify": VerifyRunner(reporter),
        }
        self.history: List[RunResponse] = []

    async def execute(self, task: RunTask) -> Dict[str, Any]:
        runner = self.runners.get(task.action)
        if runner is None:
            return {
                "success": False, "error": f"unknown action {task.action!r}",
                "error_code": "USAGE_ERROR", "exit_code": EXIT_INPUT,
            }
        response = await runner.run(task)
        self.history.append(response)
        return {
            "success": response.success,
            "data": response.data,
            "error": response.error,
            "error_code": response.error_code,
            "exit_code": response.exit_code,
        }

    async def dispatch(self, action: str, data: Optional[Dict[str, Any]] = None) -> RunResponse:
        return await self.run(RunTask.create(action, data))

    def show_history(self):
        self.reporter.show_task_summary([response.to_dict() for response in self.history])

    def runner_infos(self) -> List[Dict[str, Any]]:
        return [runner.get_info() for runner in self.runners.values()]
