# runners/sweep_runner.py
"""
SweepRunner - a viscosity sweep from a config file with `mu_values`

Members run on worker threads and are joined in the config's order; the
per-member CSVs, summary.csv and manifest.json are written even when some
members fail (exit code 2).
"""

import asyncio
import math
import time
from pathlib import Path
from typing import Any, Dict, Optional

from fsi.core_model import energy_xi_bound
from fsi.errors import ConfigValidationError
from fsi.experiments import (
    SweepResult,
    energy_partition,
    physical_rebound_verdict,
    run_member,
    sweep_summary,
    xi_envelope,
)
from store import build_manifest, emit_sweep, load_config_file, write_manifest
from store.config_loader import resolve

from .base import BaseRunner
from .protocol import EXIT_NUMERICAL, RunTask
from .reporting import Reporter


class SweepRunner(BaseRunner):
    def __init__(self, reporter: Optional[Reporter] = None):
        super().__init__(name="SweepRunner", description="Runs a viscosity sweep", reporter=reporter)

    async def execute(self, task: RunTask) -> Dict[str, Any]:
        """task.data: config (path), out (dir)"""
        started = time.perf_counter()
        config_file = load_config_file(task.data["config"])
        if not config_file.is_sweep:
            raise ConfigValidationError(
                "sweep needs mu_values", field="mu_values", constraint="required for a sweep"
            )
        cfg = resolve(config_file)
        settings = config_file.integrator
        out = Path(task.data["out"])

        with self.reporter.progress() as progress:
            bar = progress.add_task("Sweep", total=len(cfg.mu_values))

            async def member(mu: float):
                entry = await asyncio.to_thread(run_member, cfg, mu, settings)
                progress.advance(bar)
                return entry

            entries = await asyncio.gather(*(member(mu) for mu in cfg.mu_values))

        sweep = SweepResult(config=cfg, entries=tuple(entries), settings=settings)
        rows = sweep_summary(sweep)
        paths = emit_sweep(sweep, out, rows)

        energy_bound = energy_xi_bound(cfg.base.spring, cfg.base.initial.h_dot)
        extras: Dict[str, Any] = {
            "failures": [{"mu": entry.mu, **entry.error.to_dict()} for entry in sweep.failures],
            "methods": {repr(entry.mu): entry.trajectory.method for entry in sweep.completed},
            "energy_partition": {
                repr(entry.mu): energy_partition(entry.trajectory).retained for entry in sweep.completed
            },
            "xi_sup": {repr(row.mu): row.xi_sup for row in rows if math.isfinite(row.xi_sup)},
            "xi_envelope": xi_envelope(cfg.base.spring, cfg.base.initial.h_dot),
            "xi_energy_bound": energy_bound if math.isfinite(energy_bound) else None,
        }
        verdict = None
        if len(sweep.entries) >= 3:
            verdict = physical_rebound_verdict(sweep)
            extras["verdict"] = verdict.model_dump(mode="json")

        manifest = build_manifest("sweep", config_file, settings, paths, time.perf_counter() - started, extras)
        write_manifest(manifest, out)
        self.reporter.show_sweep_summary(rows, verdict)

        data = {"outputs": [str(path) for path in paths], **extras}
        if sweep.failures:
            failed = ", ".join(repr(entry.mu) for entry in sweep.failures)
            return {
                "success": False, "data": data, "error": f"sweep members failed: mu = {failed}",
                "error_code": sweep.failures[0].error.code, "exit_code": EXIT_NUMERICAL,
            }
        return {"success": True, "data": data}
