# schema.py
"""
Domain Schema - Pydantic models for the reduced wall-approach model

Every value object of the laboratory lives here. Models are frozen (safe to
share between threads) and reject unknown fields, so a typo in a config file
surfaces as a validation error naming the field.

Models:
- SpringParams: shell mass, internal mass, spring stiffness
- State / Derivative: ODE state sample and its time derivative
- BodyGeometry: near-contact surface profile psi(r) = gamma * r^(1+alpha)
- DragLaw: tagged union of drag shape factors D(h, xi)
- ModelConfig: everything needed to integrate one trajectory
- IntegratorSettings: tolerances and step controls
- SweepConfig: a viscosity family sharing one base configuration
- Report models: events, audits, rebound and verdict summaries
"""

import math
from enum import Enum
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from configs.experiment import (
    DEFAULT_AUDIT_GRID_SIZE,
    DEFAULT_T_END,
    PERSISTENCE_FRACTION,
    VANISHING_FRACTION,
)
from configs.numerics import (
    DEFAULT_ABS_TOL,
    DEFAULT_MAX_REJECTIONS,
    DEFAULT_MAX_STEPS,
    DEFAULT_QUAD_TOL,
    DEFAULT_REL_TOL,
)


FROZEN = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)


# ===========================
# ENUMS
# ===========================

class SimulationMode(str, Enum):
    """Which equation set the right-hand side integrates"""
    COUPLED = "coupled"
    RIGID_BODY = "rigid_body"


class TerminationReason(str, Enum):
    TIME_END = "time_end"
    EVENT = "event"
    FAILURE = "failure"


class EventKind(str, Enum):
    MIN_DISTANCE = "min_distance"
    ZERO_VELOCITY = "zero_velocity"
    THRESHOLD_CROSSING = "threshold_crossing"


class ExponentRegime(str, Enum):
    """Small-h behaviour of the lubrication drag"""
    POWER = "power"
    LOG = "log"
    BOUNDED = "bounded"


class CheckStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    SKIPPED = "SKIPPED"


class Verdict(str, Enum):
    PHYSICAL = "physical"
    NOT_PHYSICAL = "not_physical"
    INCONCLUSIVE = "inconclusive"


# ===========================
# MODEL PARAMETERS
# ===========================

class SpringParams(BaseModel):
    """
    Masses and stiffness of the shell / internal-mass system.

    b(xi) = k xi / M and B(y) = k y^2 / (2M) are computed from these fields
    (see fsi.core_model); a = M / m is the mass ratio.
    """
    model_config = FROZEN

    M: float = Field(gt=0, description="Shell mass (kg)")
    m: float = Field(gt=0, description="Internal mass (kg)")
    k: float = Field(ge=0, description="Spring stiffness (N/m)")

    @property
    def a(self) -> float:
        """Mass ratio M/m"""
        return self.M / self.m

    @model_validator(mode="after")
    def _finite_ratio(self) -> "SpringParams":
        ratio = self.M / self.m
        if not math.isfinite(ratio) or ratio <= 0:
            raise ValueError(f"mass ratio M/m must be finite and positive, got {ratio}")
        return self


class State(BaseModel):
    """One time-stamped sample (h, h_dot, xi, xi_dot)"""
    model_config = FROZEN

    t: float = Field(default=0.0, ge=0, description="Time (s)")
    h: float = Field(description="Distance to the wall (m)")
    h_dot: float = Field(default=0.0, description="Vertical velocity (m/s), negative towards the wall")
    xi: float = Field(default=0.0, description="Spring elongation (m)")
    xi_dot: float = Field(default=0.0, description="Elongation rate (m/s)")


class Derivative(BaseModel):
    """Right-hand side of the model ODE at one state"""
    model_config = FROZEN

    dh: float
    dh_dot: float
    dxi: float
    dxi_dot: float


# ===========================
# DRAG LAWS
# ===========================

class BodyGeometry(BaseModel):
    """
    Near-contact surface of an axisymmetric body: psi(r) = gamma * r^(1+alpha).

    The gap profile at distance h is g(r) = h + gamma * r^(1+alpha).
    """
    model_config = FROZEN

    alpha: float = Field(gt=0, description="Shape exponent")
    gamma: float = Field(gt=0, description="Shape coefficient (1/m^alpha)")
    dim: Literal[2, 3] = Field(description="Spatial dimension N")

    def gap(self, r: float, h: float) -> float:
        return h + self.gamma * r ** (1.0 + self.alpha)


class PowerLawCoupled(BaseModel):
    """D(h, xi) = (c1 * h^(-c2*xi - 3/2) + c3) / M"""
    model_config = FROZEN

    kind: Literal["power_law_coupled"] = "power_law_coupled"
    c1: float = Field(gt=0, description="Singular drag coefficient")
    c2: float = Field(ge=0, description="Flatness coupling; 0 gives the rigid shell")
    c3: float = Field(ge=0, description="Regular (Stokes) drag coefficient")
    M: float = Field(gt=0, description="Shell mass used for normalization (kg)")


class PrototypeD1(BaseModel):
    """D(h, xi) = h^(-c*xi - 3/2)"""
    model_config = FROZEN

    kind: Literal["prototype_d1"] = "prototype_d1"
    c: float = Field(gt=0)


class PrototypeD2(BaseModel):
    """D(h, xi) = h^(-max(xi, 0) - 1)"""
    model_config = FROZEN

    kind: Literal["prototype_d2"] = "prototype_d2"


class RigidPower(BaseModel):
    """D(h) = C * h^(-alpha), independent of xi"""
    model_config = FROZEN

    kind: Literal["rigid_power"] = "rigid_power"
    C: float = Field(gt=0)
    alpha: float = Field(ge=1)


class LubricationQuadrature(BaseModel):
    """Reynolds lubrication drag of a body with the given near-contact geometry"""
    model_config = FROZEN

    kind: Literal["lubrication_quadrature"] = "lubrication_quadrature"
    geom: BodyGeometry
    quad_tol: float = Field(default=DEFAULT_QUAD_TOL, gt=0, lt=1)


class AnalyticBall(BaseModel):
    """Closed-form lubrication drag of a disk (N=2) or sphere (N=3) of radius R"""
    model_config = FROZEN

    kind: Literal["analytic_ball"] = "analytic_ball"
    R: float = Field(gt=0, description="Radius (m)")
    dim: Literal[2, 3]


DragLaw = Annotated[
    Union[
        PowerLawCoupled,
        PrototypeD1,
        PrototypeD2,
        RigidPower,
        LubricationQuadrature,
        AnalyticBall,
    ],
    Field(discriminator="kind"),
]


class ExponentDescriptor(BaseModel):
    """Power-law exponent of D(h) as h -> 0+, or a regime marker"""
    model_config = FROZEN

    regime: ExponentRegime
    exponent: Optional[float] = Field(default=None, description="Set only for the POWER regime")

    def label(self) -> str:
        if self.regime is ExponentRegime.POWER:
            return repr(self.exponent)
        return self.regime.value


# ===========================
# RUN CONFIGURATION
# ===========================

class ModelConfig(BaseModel):
    """
    Everything needed to integrate one trajectory.

    mu = 0 is accepted here so the conservative (inviscid) system can be
    integrated for checks; configuration files and sweeps require mu > 0.
    """
    model_config = FROZEN

    spring: SpringParams
    drag: DragLaw
    mu: float = Field(ge=0, description="Dynamic viscosity (Pa*s)")
    initial: State
    mode: SimulationMode = SimulationMode.COUPLED

    @model_validator(mode="after")
    def _check_initial(self) -> "ModelConfig":
        if self.initial.h <= 0:
            raise ValueError(f"initial.h must be > 0, got {self.initial.h}")
        if self.mode is SimulationMode.RIGID_BODY and (self.initial.xi != 0 or self.initial.xi_dot != 0):
            raise ValueError("rigid_body mode requires xi0 = xidot0 = 0")
        return self

    def with_mu(self, mu: float) -> "ModelConfig":
        return self.model_copy(update={"mu": mu})


class IntegratorSettings(BaseModel):
    model_config = FROZEN

    rel_tol: float = Field(default=DEFAULT_REL_TOL, gt=0, lt=1)
    abs_tol: float = Field(default=DEFAULT_ABS_TOL, gt=0)
    max_step: Optional[float] = Field(default=None, gt=0, description="Seconds; defaults to 1% of the span")
    initial_step: Optional[float] = Field(default=None, gt=0, description="Seconds; defaults to 1e-6 of the span")
    max_rejections: int = Field(default=DEFAULT_MAX_REJECTIONS, ge=1, description="Per step")
    method: Literal["auto", "dopri54", "radau"] = Field(
        default="auto",
        description="auto runs the explicit pair and falls back to Radau once max_steps is spent",
    )
    max_steps: int = Field(default=DEFAULT_MAX_STEPS, ge=1, description="Explicit step budget for auto")

    def tightened(self, factor: float) -> "IntegratorSettings":
        return self.model_copy(
            update={"rel_tol": self.rel_tol / factor, "abs_tol": self.abs_tol / factor}
        )


class SweepConfig(BaseModel):
    """A family of runs sharing `base`, one per viscosity (base.mu is ignored)"""
    model_config = FROZEN

    base: ModelConfig
    mu_values: tuple[float, ...] = Field(min_length=2)
    t_end: float = Field(default=DEFAULT_T_END, gt=0)
    audit_grid_size: int = Field(default=DEFAULT_AUDIT_GRID_SIZE, ge=2)
    persistence_fraction: float = Field(default=PERSISTENCE_FRACTION, gt=0, lt=1)
    vanishing_fraction: float = Field(default=VANISHING_FRACTION, gt=0, lt=1)

    @field_validator("mu_values")
    @classmethod
    def _strictly_decreasing(cls, values: tuple[float, ...]) -> tuple[float, ...]:
        if any(mu <= 0 for mu in values):
            raise ValueError("mu_values must be strictly positive")
        if any(later >= earlier for earlier, later in zip(values, values[1:])):
            raise ValueError("mu_values must be strictly decreasing")
        return values


# ===========================
# EVENTS & REPORTS
# ===========================

class Event(BaseModel):
    model_config = FROZEN

    kind: EventKind
    t: float
    state: State
    component: str = Field(default="h", description="Signal the event was located on")


class ResidualReport(BaseModel):
    """Worst violation of F(t) + ledger(t) = F(0)"""
    model_config = FROZEN

    max_abs: float
    t_at: float
    index: int
    f0: float

    @property
    def relative(self) -> float:
        return self.max_abs / self.f0 if self.f0 > 0 else self.max_abs


class ConvergenceReport(BaseModel):
    """Distances to a tight-tolerance reference run at two tolerances `factor` apart"""
    model_config = FROZEN

    rel_tol: float
    factor: float
    coarse_distance: float
    fine_distance: float
    coarse_steps: int
    fine_steps: int

    @property
    def ratio(self) -> float:
        return self.coarse_distance / self.fine_distance if self.fine_distance > 0 else math.inf

    @property
    def order(self) -> float:
        """Observed order against the growth in accepted steps"""
        if self.fine_steps <= self.coarse_steps or not self.ratio > 0:
            return math.nan
        return math.log(self.ratio) / math.log(self.fine_steps / self.coarse_steps)


class AssumptionCheck(BaseModel):
    model_config = FROZEN

    name: str
    status: CheckStatus
    detail: str = ""
    witness: Optional[dict[str, float]] = None


class AuditParams(BaseModel):
    """Constants the drag assumptions are checked against"""
    model_config = FROZEN

    c_lower: float = Field(gt=0, description="(D.2) constant c")
    alpha_lower: float = Field(ge=1, description="(D.2)/(D.3) exponent alpha")
    delta1: float = Field(gt=0, description="(D.5) elongation")
    delta2: float = Field(gt=0, description="(D.6) elongation")
    gamma1: float = Field(gt=0, description="(D.5)/(D.6) exponent")
    c1: float = Field(gt=0, description="(D.5) constant")
    envelope: Optional[tuple[float, float]] = Field(
        default=None, description="(D.3) bounds [C1, C2] on g(h) = D(h) h^alpha"
    )


class AuditReport(BaseModel):
    model_config = FROZEN

    law: str
    params: AuditParams
    checks: tuple[AssumptionCheck, ...]
    d6_trend: tuple[tuple[float, float], ...] = Field(
        default=(), description="(h, integral of gamma(y)/y from the floor to h)"
    )
    d6_slope: Optional[float] = None

    def check(self, name: str) -> AssumptionCheck:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(item.status is not CheckStatus.FAIL for item in self.checks)


class TurningPoints(BaseModel):
    model_config = FROZEN

    y_minus: float
    y_plus: float
    t_minus: float
    t_plus: float
    t1: Optional[float] = Field(default=None, description="t0 + t_plus, when t0 is defined")
    t2: Optional[float] = Field(default=None, description="t0 + t_plus + t_minus")


class LimitDeviation(BaseModel):
    model_config = FROZEN

    interval: tuple[float, float]
    dev_h: float
    dev_xi: float
    t_dev_h: float
    t_dev_xi: float


class ReboundReport(BaseModel):
    model_config = FROZEN

    rebounded: bool
    t_min: float
    h_min: float
    max_post_min_h: float
    t_of_max: float

    @property
    def rebound_height(self) -> float:
        return self.max_post_min_h - self.h_min


class VerdictReport(BaseModel):
    model_config = FROZEN

    verdict: Verdict
    heights: tuple[tuple[float, float], ...] = Field(description="(mu, rebound height) in sweep order")
    h0: float
    persistence_fraction: float
    vanishing_fraction: float
    trend_slope: Optional[float] = None
    note: str = "finite-sweep proxy for the vanishing-viscosity limit"

    @property
    def physical(self) -> bool:
        return self.verdict is Verdict.PHYSICAL


class SweepSummaryRow(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mu: float
    h_min: float
    t_min: float
    rebound_height: float
    dev_h: float
    dev_xi: float
    energy_residual: float
    # not part of summary.csv
    dev_xi_approach: float = Field(description="xi deviation on [0, t0]")
    xi_sup: float = Field(description="sup |xi| over the run")


class PropertyResult(BaseModel):
    """Outcome of one property of the verify suite"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    id: int = Field(ge=1)
    name: str
    passed: bool
    detail: str
    metrics: dict[str, Any] = Field(default_factory=dict)
    duration: float = 0.0


class SuiteReport(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    quick: bool
    results: tuple[PropertyResult, ...]

    @property
    def passed(self) -> bool:
        return bool(self.results) and all(result.passed for result in self.results)

    @property
    def failed(self) -> tuple[PropertyResult, ...]:
        return tuple(result for result in self.results if not result.passed)


class RunManifest(BaseModel):
    """Run metadata; the only place timestamps and runtimes are written"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    manifest_version: int = 1
    tool_version: str
    environment: str = Field(default="development", description="REBOUND_ENV of the run")
    command: str
    config: dict[str, Any] = Field(description="Fully resolved config file echo")
    settings: dict[str, Any]
    outputs: tuple[str, ...]
    runtime_s: float
    created_at: str
    extras: dict[str, Any] = Field(default_factory=dict)


# ===========================
# CONFIG FILE
# ===========================

class ConfigFile(BaseModel):
    """
    On-disk JSON configuration (SI units).

    The drag law is given either by the flat coefficients c1/c2/c3 of the
    coupled power law or by an explicit `drag` object, never both. A config
    with `mu_values` describes a sweep; without it, a single run.
    """
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    # Spring
    M: float = Field(gt=0, description="Shell mass (kg)")
    m: float = Field(gt=0, description="Internal mass (kg)")
    k: float = Field(ge=0, description="Spring stiffness (N/m)")

    # Drag
    c1: Optional[float] = Field(default=None, gt=0)
    c2: Optional[float] = Field(default=None, ge=0)
    c3: Optional[float] = Field(default=None, ge=0)
    drag: Optional[DragLaw] = None

    # Run
    mu: float = Field(default=0.1, gt=0, description="Dynamic viscosity (Pa*s)")
    h0: float = Field(gt=0, description="Initial distance (m)")
    hdot0: float = Field(description="Initial velocity (m/s), negative towards the wall")
    xi0: float = Field(default=0.0, description="Initial elongation (m)")
    xidot0: float = Field(default=0.0, description="Initial elongation rate (m/s)")
    mode: SimulationMode = SimulationMode.COUPLED
    t_end: float = Field(default=DEFAULT_T_END, ge=0, description="Seconds")

    # Sweep
    mu_values: Optional[tuple[float, ...]] = None
    audit_grid_size: int = Field(default=DEFAULT_AUDIT_GRID_SIZE, ge=2)
    persistence_fraction: float = Field(default=PERSISTENCE_FRACTION, gt=0, lt=1)
    vanishing_fraction: float = Field(default=VANISHING_FRACTION, gt=0, lt=1)

    integrator: IntegratorSettings = Field(default_factory=IntegratorSettings)

    @model_validator(mode="after")
    def _one_drag_source(self) -> "ConfigFile":
        flat = (self.c1, self.c2, self.c3)
        if self.drag is not None and any(value is not None for value in flat):
            raise ValueError("give either c1/c2/c3 or drag, not both")
        if self.drag is None and any(value is None for value in flat):
            raise ValueError("c1, c2 and c3 are all required when drag is not given")
        if self.mode is SimulationMode.RIGID_BODY and (self.xi0 != 0 or self.xidot0 != 0):
            raise ValueError("rigid_body mode requires xi0 = xidot0 = 0")
        return self

    @property
    def is_sweep(self) -> bool:
        return self.mu_values is not None

    def spring(self) -> SpringParams:
        return SpringParams(M=self.M, m=self.m, k=self.k)

    def drag_law(self) -> Any:
        if self.drag is not None:
            return self.drag
        return PowerLawCoupled(c1=self.c1, c2=self.c2, c3=self.c3, M=self.M)

    def to_model_config(self) -> ModelConfig:
        return ModelConfig(
            spring=self.spring(),
            drag=self.drag_law(),
            mu=self.mu,
            initial=State(t=0.0, h=self.h0, h_dot=self.hdot0, xi=self.xi0, xi_dot=self.xidot0),
            mode=self.mode,
        )

    def to_sweep_config(self) -> SweepConfig:
        if self.mu_values is None:
            raise ValueError("config has no mu_values")
        return SweepConfig(
            base=self.to_model_config(),
            mu_values=self.mu_values,
            t_end=self.t_end,
            audit_grid_size=self.audit_grid_size,
            persistence_fraction=self.persistence_fraction,
            vanishing_fraction=self.vanishing_fraction,
        )

    def echo(self) -> dict[str, Any]:
        """Fully resolved config with every default materialized"""
        return self.model_dump(mode="json")
