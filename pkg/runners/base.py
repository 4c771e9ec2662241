# runners/base.py
"""
BaseRunner - common base of the lab runners

A runner turns one RunTask into a RunResponse. Subclasses implement
`execute`; `run` wraps it with status tracking, timing and the mapping of
library errors onto exit codes.
"""

import time
from abc import ABC, abstractmethod
from datetime import datetime
from typing import Any, Dict, Optional

from fsi.errors import ReboundLabError
from fsi.log import get_logger

from .protocol import EXIT_INPUT, EXIT_OK, RunResponse, RunTask
from .reporting import Reporter

logger = get_logger(__name__)


class BaseRunner(ABC):
    """Base class of every runner"""

    def __init__(self, name: str, description: str = "", reporter: Optional[Reporter] = None):
        self.name = name
        self.description = description
        self.status = "idle"  # idle, running, completed, failed
        self.created_at = datetime.now()
        self.reporter = reporter or Reporter()

    @abstractmethod
    async def execute(self, task: RunTask) -> Dict[str, Any]:
        """
        Main logic of the runner.

        Returns a dict with
            - success: bool
            - data: result data
            - error / exit_code: set when success is False
        Library errors may simply be raised; `run` converts them.
        """

    async def run(self, task: RunTask) -> RunResponse:
        """Run `task` with status tracking; never raises ReboundLabError"""
        self.status = task.status = "running"
        started = time.perf_counter()
        self._log(f"Starting {task.action} ({task.task_id})")

        try:
            result = await self.execute(task)
            response = RunResponse(
                task_id=task.task_id,
                runner_name=self.name,
                success=bool(result.get("success", False)),
                data=result.get("data", {}),
                error=result.get("error"),
                error_code=result.get("error_code"),
                exit_code=result.get("exit_code", EXIT_OK if result.get("success") else EXIT_INPUT),
            )
        except ReboundLabError as exc:
            response = RunResponse.from_error(task, self.name, exc)
            self.reporter.error_panel(exc, self.name)

        response.duration = time.perf_counter() - started
        if response.success:
            self.status = task.status = "completed"
            self._log(f"{task.action} completed in {response.duration:.2f}s", "success")
        else:
            self.status = task.status = "failed"
            self._log(f"{task.action} failed: {response.error}", "error")
        return response

    def _log(self, message: str, level: str = "info"):
        self.reporter.log(f"[{self.name}] {message}", level)
        logger.debug("%s: %s", self.name, message)

    def get_info(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "status": self.status,
            "created_at": self.created_at.isoformat(),
        }
