# runners/simulate_runner.py
"""
SimulateRunner - one trajectory from a config file

Writes trajectory.csv and manifest.json into the output directory. A step
failure still writes the partial trajectory before reporting exit code 2.
"""

import asyncio
import time
from pathlib import Path
from typing import Any, Dict, Optional

from fsi.errors import StepFailureError
from fsi.experiments import detect_rebound
from fsi.integrator import Trajectory, integrate
from store import apply_overrides, build_manifest, emit_csv, load_config_file, resolve_model, write_manifest

from .base import BaseRunner
from .protocol import EXIT_NUMERICAL, RunTask
from .reporting import Reporter


def trajectory_extras(traj: Trajectory) -> Dict[str, Any]:
    extras: Dict[str, Any] = {
        "termination": traj.termination.value,
        "method": traj.method,
        "samples": len(traj),
        "accepted_steps": traj.stats.accepted,
        "rejected_steps": traj.stats.rejected,
        "positivity_rejections": traj.stats.positivity_rejections,
        "min_h": float(traj.h.min()),
        "warnings": list(traj.warnings),
    }
    if len(traj) > 1:
        rebound = detect_rebound(traj)
        extras.update(rebounded=rebound.rebounded, t_min=rebound.t_min, rebound_height=rebound.rebound_height)
    return extras


class SimulateRunner(BaseRunner):
    def __init__(self, reporter: Optional[Reporter] = None):
        super().__init__(name="SimulateRunner", description="Integrates one configuration", reporter=reporter)

    async def execute(self, task: RunTask) -> Dict[str, Any]:
        """task.data: config (path), out (dir), t_end (optional override)"""
        started = time.perf_counter()
        config_file = apply_overrides(load_config_file(task.data["config"]), t_end=task.data.get("t_end"))
        cfg = resolve_model(config_file)
        t_end = config_file.t_end
        out = Path(task.data["out"])

        self._log(f"mu={cfg.mu!r}, mode={cfg.mode.value}, t_end={t_end!r}")
        failure: Optional[StepFailureError] = None
        try:
            traj = await asyncio.to_thread(integrate, cfg, t_end, config_file.integrator)
        except StepFailureError as exc:
            if exc.trajectory is None:
                raise
            failure, traj = exc, exc.trajectory

        for warning in traj.warnings:
            self._log(warning, "warning")

        [path] = emit_csv(traj, out)
        extras = trajectory_extras(traj)
        manifest = build_manifest(
            "simulate", config_file, config_file.integrator, [path],
            time.perf_counter() - started, extras,
        )
        write_manifest(manifest, out)
        self.reporter.result_panel(
            "📈 Trajectory",
            {"file": str(path), **{key: value for key, value in extras.items() if key != "warnings"}},
            success=failure is None,
        )

        if failure is not None:
            self.reporter.error_panel(failure, self.name)
            return {
                "success": False, "data": extras, "error": failure.message,
                "error_code": failure.code, "exit_code": EXIT_NUMERICAL,
            }
        return {"success": True, "data": {"outputs": [str(path)], **extras}}
