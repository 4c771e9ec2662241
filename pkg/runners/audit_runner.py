# runners/audit_runner.py
"""
AuditRunner - assumption audit of a config's drag law and spring

The elongation grid spans the config's envelope of reachable xi. Failed
checks are reported, not treated as errors.
"""

import asyncio
from typing import Any, Dict, Optional

from fsi import core_model, drag
from fsi.experiments import xi_envelope
from store import load_config_file, resolve_model

from .base import BaseRunner
from .protocol import RunTask
from .reporting import Reporter


class AuditRunner(BaseRunner):
    def __init__(self, reporter: Optional[Reporter] = None):
        super().__init__(name="AuditRunner", description="Checks drag and spring assumptions", reporter=reporter)

    async def execute(self, task: RunTask) -> Dict[str, Any]:
        """task.data: config (path)"""
        config_file = load_config_file(task.data["config"])
        cfg = resolve_model(config_file)
        envelope = xi_envelope(cfg.spring, cfg.initial.h_dot)
        xi_grid = drag.default_xi_grid(envelope)

        report = await asyncio.to_thread(drag.assumption_audit, cfg.drag, None, xi_grid)
        spring_checks = core_model.spring_audit(cfg.spring, xi_grid)
        margin = drag.flatness_margin(cfg.drag, envelope)

        self.reporter.show_audit(report)
        self.reporter.show_checks("🔎 Spring assumptions", spring_checks)
        self._log(f"flatness margin 1/(2c) - sup|xi| = {margin:.6g}", "info" if margin > 0 else "warning")

        return {
            "success": True,
            "data": {
                "law": report.law,
                "passed": report.passed,
                "checks": {check.name: check.status.value for check in report.checks + spring_checks},
                "flatness_margin": margin,
            },
        }
