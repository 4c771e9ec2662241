# fsi/presets.py
"""Canonical configurations of the reference falling-shell experiment"""

from typing import Sequence

from configs.experiment import (
    DEFAULT_MU_VALUES,
    DEFAULT_T_END,
    DEFAULT_VISCOSITY,
    DRAG_C1,
    DRAG_C2_DEFORMABLE,
    DRAG_C2_RIGID,
    DRAG_C3,
    INITIAL_DISTANCE,
    INITIAL_VELOCITY,
    INTERNAL_MASS,
    RIGID_BODY_DRAG_ALPHA,
    RIGID_BODY_DRAG_C,
    SHELL_MASS,
    SPRING_STIFFNESS,
)
from schema import (
    ModelConfig,
    PowerLawCoupled,
    RigidPower,
    SimulationMode,
    SpringParams,
    State,
    SweepConfig,
)


def reference_spring() -> SpringParams:
    return SpringParams(M=SHELL_MASS, m=INTERNAL_MASS, k=SPRING_STIFFNESS)


def reference_initial(h0: float = INITIAL_DISTANCE, hdot0: float = INITIAL_VELOCITY) -> State:
    return State(t=0.0, h=h0, h_dot=hdot0, xi=0.0, xi_dot=0.0)


def coupled_drag(c2: float) -> PowerLawCoupled:
    return PowerLawCoupled(c1=DRAG_C1, c2=c2, c3=DRAG_C3, M=SHELL_MASS)


def deformable_config(mu: float = DEFAULT_VISCOSITY) -> ModelConfig:
    """Shell whose flattening weakens the singular drag (c2 = 20)"""
    return ModelConfig(
        spring=reference_spring(), drag=coupled_drag(DRAG_C2_DEFORMABLE), mu=mu,
        initial=reference_initial(),
    )


def rigid_shell_config(mu: float = DEFAULT_VISCOSITY) -> ModelConfig:
    """Same shell with c2 = 0: the drag no longer sees the elongation"""
    return ModelConfig(
        spring=reference_spring(), drag=coupled_drag(DRAG_C2_RIGID), mu=mu,
        initial=reference_initial(),
    )


def rigid_body_config(
    mu: float = DEFAULT_VISCOSITY,
    alpha: float = RIGID_BODY_DRAG_ALPHA,
    C: float = RIGID_BODY_DRAG_C,
) -> ModelConfig:
    return ModelConfig(
        spring=reference_spring(), drag=RigidPower(C=C, alpha=alpha), mu=mu,
        initial=reference_initial(), mode=SimulationMode.RIGID_BODY,
    )


def sweep_of(
    base: ModelConfig, mu_values: Sequence[float] = DEFAULT_MU_VALUES, t_end: float = DEFAULT_T_END
) -> SweepConfig:
    return SweepConfig(base=base, mu_values=tuple(mu_values), t_end=t_end)


def deformable_sweep(mu_values: Sequence[float] = DEFAULT_MU_VALUES) -> SweepConfig:
    return sweep_of(deformable_config(), mu_values)


def rigid_shell_sweep(mu_values: Sequence[float] = DEFAULT_MU_VALUES) -> SweepConfig:
    return sweep_of(rigid_shell_config(), mu_values)
