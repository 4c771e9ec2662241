# fsi/experiments.py
"""
Viscosity sweeps and the checks built on them.

- run_sweep / run_sweep_async: one trajectory per viscosity
- LimitProfiles, xi_limit_solve, limit_deviation: distance to the
  vanishing-viscosity limit (hit-and-stick distance, free spring oscillation)
- turning_points: extreme elongations and the times spent reaching them
- detect_rebound, physical_rebound_verdict: rebound height and whether it
  survives along the sweep (a finite-sweep proxy for the limit)
- energy_partition, oscillation_period, rigid_rest_height: further
  diagnostics of single runs
"""

import asyncio
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from configs.experiment import (
    DEFAULT_AUDIT_GRID_SIZE,
    POST_CONTACT_MARGIN,
    XI_ENVELOPE_SLACK,
    XI_ENERGY_BOUND,
)
from configs.numerics import QUAD_SUBDIVISION_LIMIT, TURNING_POINT_QUAD_TOL
from fsi import drag as drag_laws
from fsi.core_model import XI
from fsi.errors import DomainError, ReboundLabError, StepFailureError, UndefinedT0Error
from fsi.integrator import Trajectory, energy_residual, integrate as integrate_ode, locate_events
from fsi.log import get_logger
from schema import (
    EventKind,
    IntegratorSettings,
    LimitDeviation,
    ModelConfig,
    ReboundReport,
    SimulationMode,
    SpringParams,
    SweepConfig,
    SweepSummaryRow,
    TurningPoints,
    Verdict,
    VerdictReport,
)

logger = get_logger(__name__)


# ==================== Sweeps ====================

@dataclass(frozen=True, eq=False)
class SweepEntry:
    mu: float
    trajectory: Optional[Trajectory]
    error: Optional[ReboundLabError] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Trajectories keyed by viscosity, in the sweep's (decreasing) order"""

    config: SweepConfig
    entries: tuple[SweepEntry, ...]
    settings: IntegratorSettings = field(default_factory=IntegratorSettings)

    @property
    def mu_values(self) -> tuple[float, ...]:
        return tuple(entry.mu for entry in self.entries)

    @property
    def failures(self) -> tuple[SweepEntry, ...]:
        return tuple(entry for entry in self.entries if entry.failed)

    @property
    def completed(self) -> tuple[SweepEntry, ...]:
        return tuple(entry for entry in self.entries if not entry.failed)

    def trajectory(self, mu: float) -> Trajectory:
        for entry in self.entries:
            if entry.mu == mu and entry.trajectory is not None and not entry.failed:
                return entry.trajectory
        raise KeyError(mu)

    @classmethod
    def from_trajectories(
        cls, config: SweepConfig, trajectories: Sequence[Trajectory]
    ) -> "SweepResult":
        entries = tuple(SweepEntry(mu, traj) for mu, traj in zip(config.mu_values, trajectories))
        return cls(config=config, entries=entries)


def run_member(cfg: SweepConfig, mu: float, settings: IntegratorSettings) -> SweepEntry:
    """Integrate one sweep member; numerical failures are recorded, not raised"""
    try:
        traj = integrate_ode(cfg.base.with_mu(mu), cfg.t_end, settings)
    except StepFailureError as exc:
        logger.error("mu=%r failed: %s", mu, exc.message)
        return SweepEntry(mu, exc.trajectory, exc)
    except ReboundLabError as exc:
        logger.error("mu=%r failed: %s", mu, exc.message)
        return SweepEntry(mu, None, exc)
    logger.info("mu=%r: %d steps, min h %.6g", mu, traj.stats.accepted, float(traj.h.min()))
    return SweepEntry(mu, traj)


def run_sweep(cfg: SweepConfig, settings: Optional[IntegratorSettings] = None) -> SweepResult:
    settings = settings or IntegratorSettings()
    entries = tuple(run_member(cfg, mu, settings) for mu in cfg.mu_values)
    return SweepResult(config=cfg, entries=entries, settings=settings)


async def run_sweep_async(
    cfg: SweepConfig, settings: Optional[IntegratorSettings] = None
) -> SweepResult:
    """Same as run_sweep with members integrated on worker threads"""
    settings = settings or IntegratorSettings()
    entries = await asyncio.gather(
        *(asyncio.to_thread(run_member, cfg, mu, settings) for mu in cfg.mu_values)
    )
    return SweepResult(config=cfg, entries=tuple(entries), settings=settings)


# ==================== Limit profiles ====================

def xi_limit_solve(p: SpringParams, h0: float, hdot0: float, t_grid: Sequence[float]) -> np.ndarray:
    """Free oscillation started at t0 = -h0/hdot0 with xi = 0, xi_dot = -hdot0"""
    if hdot0 >= 0:
        raise UndefinedT0Error(f"t0 needs hdot0 < 0, got {hdot0!r}", hdot0=hdot0)
    if not p.k > 0:
        raise DomainError(f"xi limit needs k > 0, got {p.k!r}", k=p.k)
    t = np.asarray(t_grid, dtype=float)
    t0 = -h0 / hdot0
    omega = math.sqrt(p.k / p.m)
    return np.where(t > t0, (-hdot0 / omega) * np.sin(omega * (t - t0)), 0.0)


@dataclass(frozen=True)
class LimitProfiles:
    """Vanishing-viscosity limits of h and xi for the given initial data"""

    spring: SpringParams
    h0: float
    hdot0: float

    @classmethod
    def for_config(cls, cfg: ModelConfig) -> "LimitProfiles":
        return cls(spring=cfg.spring, h0=cfg.initial.h, hdot0=cfg.initial.h_dot)

    @property
    def t0(self) -> Optional[float]:
        return -self.h0 / self.hdot0 if self.hdot0 < 0 else None

    def H(self, t: Sequence[float] | float) -> np.ndarray:
        return np.maximum(0.0, self.h0 + self.hdot0 * np.asarray(t, dtype=float))

    def xi_limit(self, t: Sequence[float] | float) -> np.ndarray:
        times = np.asarray(t, dtype=float)
        if self.t0 is None:
            return np.zeros_like(times)
        if self.spring.k == 0:
            return np.where(times > self.t0, -self.hdot0 * (times - self.t0), 0.0)
        return xi_limit_solve(self.spring, self.h0, self.hdot0, times)


def limit_deviation(
    traj: Trajectory,
    profiles: LimitProfiles,
    interval: tuple[float, float],
    grid_size: int = DEFAULT_AUDIT_GRID_SIZE,
) -> LimitDeviation:
    """Sup-norm distance of h and xi from their limits on a uniform grid"""
    start, stop = interval
    if start > stop or start < traj.t_start or stop > traj.t_end:
        raise DomainError(
            f"interval {interval} not inside [{traj.t_start}, {traj.t_end}]", interval=interval
        )
    grid = np.array([start]) if start == stop else np.linspace(start, stop, grid_size)
    states = traj.evaluate(grid)
    gap_h = np.abs(states[:, 0] - profiles.H(grid))
    gap_xi = np.abs(states[:, 2] - profiles.xi_limit(grid))
    i, j = int(np.argmax(gap_h)), int(np.argmax(gap_xi))
    return LimitDeviation(
        interval=(start, stop),
        dev_h=float(gap_h[i]),
        dev_xi=float(gap_xi[j]),
        t_dev_h=float(grid[i]),
        t_dev_xi=float(grid[j]),
    )


# ==================== Turning points ====================

def turning_points(p: SpringParams, hdot0: float, h0: Optional[float] = None) -> TurningPoints:
    """
    Roots y- < 0 < y+ of 2aB(y) = hdot0^2 and the times

        t+- = 2 |int_0^{y+-} (hdot0^2 - 2aB(y))^(-1/2) dy|

    integrated with y = y+- sin^2(theta), which removes the endpoint
    singularity.
    """
    if not p.k > 0:
        raise DomainError(f"turning points need k > 0, got {p.k!r}", k=p.k)
    if hdot0 == 0:
        raise DomainError("turning points need hdot0 != 0")

    stiffness = p.a * p.k / p.M
    amplitude = abs(hdot0) / math.sqrt(stiffness)

    def travel_time(y_pm: float) -> float:
        # gap = stiffness (y_pm - y)(y_pm + y) with y_pm - y = y_pm cos^2; the cos
        # from dy cancels against sqrt(cos^2)
        def integrand(theta: float) -> float:
            s = math.sin(theta)
            y = y_pm * s * s
            return 2.0 * abs(y_pm) * s / math.sqrt(stiffness * y_pm * (y_pm + y))

        value, _ = integrate.quad(
            integrand, 0.0, math.pi / 2, epsabs=0.0, epsrel=TURNING_POINT_QUAD_TOL,
            limit=QUAD_SUBDIVISION_LIMIT,
        )
        return 2.0 * value

    t_plus, t_minus = travel_time(amplitude), travel_time(-amplitude)

    t1 = t2 = None
    if h0 is not None and hdot0 < 0:
        t0 = -h0 / hdot0
        t1, t2 = t0 + t_plus, t0 + t_plus + t_minus
    return TurningPoints(
        y_minus=-amplitude, y_plus=amplitude, t_minus=t_minus, t_plus=t_plus, t1=t1, t2=t2
    )


def xi_envelope(p: SpringParams, hdot0: float) -> float:
    """Bound on sup |xi| along any run: the larger amplitude bound plus slack"""
    amplitude = turning_points(p, hdot0).y_plus if p.k > 0 and hdot0 != 0 else 0.0
    return max(amplitude, XI_ENERGY_BOUND) + XI_ENVELOPE_SLACK


def xi_sup(traj: Trajectory, grid_size: int = DEFAULT_AUDIT_GRID_SIZE) -> float:
    """sup |xi| over the dense output on a uniform grid plus the accepted samples"""
    grid = np.linspace(traj.t_start, traj.t_end, grid_size)
    return float(max(np.max(np.abs(traj.evaluate(grid)[:, XI])), np.max(np.abs(traj.y[:, XI]))))


# ==================== Rebound ====================

def detect_rebound(
    traj: Trajectory, h_floor_fraction: float = 0.0, abs_tol: Optional[float] = None
) -> ReboundReport:
    """Whether h rises above its minimum by more than the floor after reaching it"""
    events = locate_events(traj, [EventKind.MIN_DISTANCE])
    t_min = events[0].t
    h_min = events[0].state.h

    after = traj.t > t_min
    times = np.concatenate(([t_min], traj.t[after]))
    heights = np.concatenate(([h_min], traj.h[after]))
    k = int(np.argmax(heights))

    if abs_tol is None:
        abs_tol = (traj.settings or IntegratorSettings()).abs_tol
    floor = max(h_floor_fraction * traj.config.initial.h, 10.0 * abs_tol)
    return ReboundReport(
        rebounded=bool(heights[k] > h_min + floor),
        t_min=t_min,
        h_min=h_min,
        max_post_min_h=float(heights[k]),
        t_of_max=float(times[k]),
    )


def _trend_slope(mus: Sequence[float], heights: Sequence[float]) -> float:
    """Slope of rebound height against log10(mu); positive means heights shrink with mu"""
    return float(np.polyfit(np.log10(np.asarray(mus)), np.asarray(heights), 1)[0])


def verdict_from_heights(
    mus: Sequence[float],
    heights: Sequence[float],
    h0: float,
    persistence_fraction: float,
    vanishing_fraction: float,
) -> VerdictReport:
    if len(mus) < 3:
        raise DomainError(f"a verdict needs at least 3 viscosities, got {len(mus)}")

    slope = _trend_slope(mus, heights)
    if all(height >= persistence_fraction * h0 for height in heights[-2:]):
        verdict = Verdict.PHYSICAL
    elif heights[-1] < vanishing_fraction * h0 and slope > 0:
        verdict = Verdict.NOT_PHYSICAL
    else:
        verdict = Verdict.INCONCLUSIVE

    return VerdictReport(
        verdict=verdict,
        heights=tuple(zip(map(float, mus), map(float, heights))),
        h0=h0,
        persistence_fraction=persistence_fraction,
        vanishing_fraction=vanishing_fraction,
        trend_slope=slope,
    )


def physical_rebound_verdict(sweep: SweepResult) -> VerdictReport:
    """
    Does the rebound survive as mu decreases?

    PHYSICAL when the two smallest viscosities keep a rebound height of at
    least persistence_fraction * h0; NOT_PHYSICAL when the last height is
    below vanishing_fraction * h0 and heights shrink with mu; otherwise
    INCONCLUSIVE. Failed members make the verdict INCONCLUSIVE.
    """
    cfg = sweep.config
    h0 = cfg.base.initial.h
    if len(sweep.entries) < 3:
        raise DomainError(f"a verdict needs at least 3 viscosities, got {len(sweep.entries)}")

    if sweep.failures:
        return VerdictReport(
            verdict=Verdict.INCONCLUSIVE,
            heights=(),
            h0=h0,
            persistence_fraction=cfg.persistence_fraction,
            vanishing_fraction=cfg.vanishing_fraction,
            note=f"{len(sweep.failures)} sweep member(s) failed",
        )

    mus = [entry.mu for entry in sweep.entries]
    heights = [detect_rebound(entry.trajectory).rebound_height for entry in sweep.entries]  # type: ignore[arg-type]
    return verdict_from_heights(mus, heights, h0, cfg.persistence_fraction, cfg.vanishing_fraction)


# ==================== Diagnostics ====================

@dataclass(frozen=True)
class EnergyPartition:
    retained: float
    predicted: float
    t_from: float


def energy_partition(traj: Trajectory, t_from: Optional[float] = None) -> EnergyPartition:
    """
    Mean F / F(0) after `t_from` against the share m/(M+m) of the internal
    mass, which is what survives the vanishing-viscosity collision.
    """
    p = traj.config.spring
    profiles = LimitProfiles.for_config(traj.config)
    if t_from is None:
        t_from = (profiles.t0 or traj.t_start) + POST_CONTACT_MARGIN
    t_from = min(t_from, traj.t_end)
    F = traj.energy()
    late = F[traj.t >= t_from]
    retained = float(late.mean() / F[0]) if late.size and F[0] > 0 else math.nan
    return EnergyPartition(retained=retained, predicted=p.m / (p.M + p.m), t_from=t_from)


def oscillation_period(traj: Trajectory, t_from: float = 0.0) -> float:
    """Twice the mean spacing of xi_dot zero crossings after t_from (nan if fewer than two)"""
    crossings = [
        event.t
        for event in locate_events(traj, [EventKind.ZERO_VELOCITY], component="xi_dot")
        if event.t > t_from
    ]
    if len(crossings) < 2:
        return math.nan
    return 2.0 * float(np.mean(np.diff(crossings)))


def rigid_rest_height(cfg: ModelConfig) -> Optional[float]:
    """
    Terminal distance of a rigid body: the h_inf with

        (mu/m) int_{h_inf}^{h0} D(s) ds = -hdot0.

    None when the body is not moving towards the wall or the drag cannot
    absorb the initial momentum before contact.
    """
    if cfg.mode is not SimulationMode.RIGID_BODY or drag_laws.depends_on_xi(cfg.drag):
        raise DomainError("rest height needs a xi-independent drag law in rigid_body mode")
    h0, hdot0 = cfg.initial.h, cfg.initial.h_dot
    if hdot0 >= 0 or cfg.mu == 0:
        return None

    drag = drag_laws.compile_law(cfg.drag)
    damping = cfg.mu / cfg.spring.m

    def absorbed(log_h: float) -> float:
        value, _ = integrate.quad(
            lambda u: drag(math.exp(u), 0.0) * math.exp(u), log_h, math.log(h0),
            limit=QUAD_SUBDIVISION_LIMIT,
        )
        return damping * value + hdot0

    upper = math.log(h0)
    lower = upper - 1.0
    while absorbed(lower) < 0:
        lower = upper - 2.0 * (upper - lower)
        if lower < math.log(1e-300):
            return None
    return math.exp(optimize.brentq(absorbed, lower, upper, xtol=1e-14, rtol=1e-14))


def summary_intervals(traj: Trajectory) -> tuple[tuple[float, float], tuple[float, float]]:
    """[0, t0] for h and [t0 + margin, t_end] for xi, clipped to the run"""
    t0 = LimitProfiles.for_config(traj.config).t0
    start, stop = traj.t_start, traj.t_end
    if t0 is None:
        return (start, stop), (start, stop)
    contact = min(t0, stop)
    return (start, contact), (min(contact + POST_CONTACT_MARGIN, stop), stop)


def summary_row(mu: float, traj: Trajectory, grid_size: int = DEFAULT_AUDIT_GRID_SIZE) -> SweepSummaryRow:
    profiles = LimitProfiles.for_config(traj.config)
    h_interval, xi_interval = summary_intervals(traj)
    approach = limit_deviation(traj, profiles, h_interval, grid_size)
    rebound = detect_rebound(traj)
    return SweepSummaryRow(
        mu=mu,
        h_min=rebound.h_min,
        t_min=rebound.t_min,
        rebound_height=rebound.rebound_height,
        dev_h=approach.dev_h,
        dev_xi=limit_deviation(traj, profiles, xi_interval, grid_size).dev_xi,
        energy_residual=energy_residual(traj).max_abs,
        dev_xi_approach=approach.dev_xi,
        xi_sup=xi_sup(traj, grid_size),
    )


def sweep_summary(sweep: SweepResult) -> list[SweepSummaryRow]:
    """One row per viscosity; failed members get nan metrics"""
    rows = []
    for entry in sweep.entries:
        if entry.failed or entry.trajectory is None:
            nan = math.nan
            rows.append(
                SweepSummaryRow(
                    mu=entry.mu, h_min=nan, t_min=nan, rebound_height=nan,
                    dev_h=nan, dev_xi=nan, energy_residual=nan, dev_xi_approach=nan, xi_sup=nan,
                )
            )
            continue
        rows.append(summary_row(entry.mu, entry.trajectory, sweep.config.audit_grid_size))
    return rows
