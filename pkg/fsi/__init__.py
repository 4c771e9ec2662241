# fsi/__init__.py
"""
Reduced fluid-structure model of a spring-mass shell approaching a wall

Modules:
- core_model - spring law, right-hand side, energy functional
- drag - drag shape factors, lubrication quadrature, assumption audit
- integrator - adaptive integration, dense output, events
- experiments - viscosity sweeps, limit profiles, rebound verdict
- presets - canonical configurations of the reference experiment
- acceptance - property suite behind `rebound-lab verify`
"""

__version__ = "1.0.0"

from .errors import ReboundLabError
from .integrator import Trajectory, integrate, locate_events, energy_residual
from .experiments import SweepResult, run_sweep, run_sweep_async, physical_rebound_verdict

__all__ = [
    "ReboundLabError",
    "Trajectory",
    "integrate",
    "locate_events",
    "energy_residual",
    "SweepResult",
    "run_sweep",
    "run_sweep_async",
    "physical_rebound_verdict",
]
