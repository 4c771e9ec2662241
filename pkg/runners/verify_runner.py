# runners/verify_runner.py
"""VerifyRunner - the property suite; exit code 3 when any property fails"""

import asyncio
from typing import Any, Dict, Optional

from fsi.acceptance import run_suite

from .base import BaseRunner
from .protocol import EXIT_PROPERTY, RunTask
from .reporting import Reporter


class VerifyRunner(BaseRunner):
    def __init__(self, reporter: Optional[Reporter] = None):
        super().__init__(name="VerifyRunner", description="Runs the acceptance property suite", reporter=reporter)

    async def execute(self, task: RunTask) -> Dict[str, Any]:
        """task.data: quick (bool), only (list of property ids)"""
        quick = bool(task.data.get("quick", False))
        only = task.data.get("only") or None
        report = await asyncio.to_thread(run_suite, quick, only)
        self.reporter.show_suite(report)

        data = {"passed": report.passed, "results": [result.model_dump(mode="json") for result in report.results]}
        if not report.passed:
            names = ", ".join(f"{result.id} {result.name}" for result in report.failed)
            return {
                "success": False, "data": data, "error": f"properties failed: {names}",
                "error_code": "PROPERTY_FAILURE", "exit_code": EXIT_PROPERTY,
            }
        return {"success": True, "data": data}
