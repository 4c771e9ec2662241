# runners/drag_table_runner.py
"""DragTableRunner - lubrication drag of one geometry on a log-spaced h grid"""

import asyncio
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from fsi.drag import drag_table
from fsi.errors import ConfigValidationError
from schema import BodyGeometry
from store import emit_drag_table

from .base import BaseRunner
from .protocol import RunTask
from .reporting import Reporter


class DragTableRunner(BaseRunner):
    def __init__(self, reporter: Optional[Reporter] = None):
        super().__init__(
            name="DragTableRunner", description="Tabulates quadrature vs closed-form drag", reporter=reporter
        )

    async def execute(self, task: RunTask) -> Dict[str, Any]:
        """task.data: alpha, gamma, dim, h_min, h_max, points, out (file)"""
        data = task.data
        try:
            geom = BodyGeometry(alpha=data["alpha"], gamma=data["gamma"], dim=data["dim"])
        except ValidationError as exc:
            first = exc.errors()[0]
            raise ConfigValidationError(
                str(exc), field=".".join(map(str, first["loc"])), constraint=first["msg"]
            ) from exc

        rows = await asyncio.to_thread(drag_table, geom, data["h_min"], data["h_max"], data["points"])
        path = emit_drag_table(rows, Path(data["out"]))
        self.reporter.show_drag_table(rows)
        self._log(f"{len(rows)} rows written to {path}", "success")
        return {"success": True, "data": {"outputs": [str(path)], "rows": len(rows)}}
