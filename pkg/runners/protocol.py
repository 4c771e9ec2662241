# runners/protocol.py
"""
Protocol - task and response records exchanged with the runners

- RunTask: one requested action (simulate, sweep, drag_table, audit, verify)
- RunResponse: its outcome, with the error code and the process exit code
"""

import uuid
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, Optional

from fsi.errors import ReboundLabError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2
EXIT_PROPERTY = 3


@dataclass
class RunTask:
    """An action for a runner"""

    task_id: str
    action: str
    data: Dict[str, Any]
    created_at: datetime
    status: str = "pending"  # pending, running, completed, failed

    def to_dict(self) -> Dict[str, Any]:
        return {
            "task_id": self.task_id,
            "action": self.action,
            "data": {key: str(value) for key, value in self.data.items()},
            "created_at": self.created_at.isoformat(),
            "status": self.status,
        }

    @classmethod
    def create(cls, action: str, data: Optional[Dict[str, Any]] = None) -> "RunTask":
        return cls(
            task_id=str(uuid.uuid4())[:8],
            action=action,
            data=dict(data or {}),
            created_at=datetime.now(),
        )


@dataclass
class RunResponse:
    """Outcome of a RunTask"""

    task_id: str
    runner_name: str
    success: bool
    data: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None
    error_code: Optional[str] = None
    exit_code: int = EXIT_OK
    duration: Optional[float] = None  # seconds
    timestamp: Optional[datetime] = None

    def __post_init__(self):
        if self.timestamp is None:
            self.timestamp = datetime.now()
        if not self.success and self.exit_code == EXIT_OK:
            self.exit_code = EXIT_INPUT

    @classmethod
    def from_error(cls, task: RunTask, runner_name: str, exc: ReboundLabError) -> "RunResponse":
        return cls(
            task_id=task.task_id,
            runner_name=runner_name,
            success=False,
            data=exc.to_dict(),
            error=exc.message,
            error_code=exc.code,
            exit_code=exc.exit_code,
        )

    def to_dict(self) -> Dict[str, Any]:
        result = {
            "task_id": self.task_id,
            "runner_name": self.runner_name,
            "success": self.success,
            "exit_code": self.exit_code,
            "timestamp": self.timestamp.isoformat(),
        }
        if self.error:
            result["error"] = self.error
            result["error_code"] = self.error_code
        if self.duration is not None:
            result["duration"] = self.duration
        return result
