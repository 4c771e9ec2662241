# fsi/acceptance.py
"""
Property suite behind `rebound-lab verify`.

Each property is a plain function of a SuiteContext returning
(passed, detail, metrics); `run_suite` times them and turns library errors
into failed results. Sweeps are computed once per context and shared.

Properties:
 1. no_contact - h stays positive on every sweep member
 2. energy_identity - F + ledger = F(0) within tolerance, shrinking with it
 3. rigid_body_monotone - a rigid body never moves away from the wall
 4. hit_and_stick - rigid-shell runs approach the hit-and-stick limit
 5. physical_rebound - deformable shells rebound, rigid shells do not
 6. drag_closed_form - lubrication quadrature matches the ball formulas
 7. asymptotic_exponents - small-h slopes of the lubrication drag
 8. oscillator_limit - turning times and stuck-shell oscillation period
 9. assumption_audit - prototype laws against the monotonicity assumption
"""

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional

import numpy as np

from configs.experiment import (
    CLOSED_FORM_HEIGHTS,
    CLOSED_FORM_RADIUS,
    CONVERGENCE_MU,
    CONVERGENCE_T_END,
    DEFAULT_MU_VALUES,
    DEFAULT_T_END,
    DRAG_CLOSED_FORM_RTOL,
    ENERGY_RESIDUAL_BOUND,
    EXPONENT_FIT_ALPHAS,
    EXPONENT_FIT_HEIGHTS,
    EXPONENT_FIT_TOL,
    HALF_PERIOD_RTOL,
    MIN_CONVERGENCE_ORDER,
    MIN_DISTANCE_SHRINK,
    MIN_RESIDUAL_SHRINK,
    MONOTONE_SLACK,
    POST_CONTACT_MARGIN,
    QUICK_AUDIT_GRID_SIZE,
    QUICK_MU_VALUES,
    REFERENCE_TIGHTENING,
    TOLERANCE_TIGHTENING,
    TREND_SLACK,
    TURNING_TIME_RTOL,
)
from fsi import drag as drag_laws
from fsi import presets
from fsi.errors import DivergentIntegralError, DomainError, ReboundLabError
from fsi.experiments import (
    LimitProfiles,
    SweepResult,
    detect_rebound,
    oscillation_period,
    physical_rebound_verdict,
    run_sweep,
    sweep_summary,
    turning_points,
)
from fsi.integrator import energy_residual, integrate, locate_events, self_convergence
from fsi.log import get_logger
from schema import (
    BodyGeometry,
    CheckStatus,
    EventKind,
    IntegratorSettings,
    PropertyResult,
    PrototypeD1,
    PrototypeD2,
    RigidPower,
    SuiteReport,
    Verdict,
)

logger = get_logger(__name__)

Outcome = tuple[bool, str, dict[str, Any]]


@dataclass
class SuiteContext:
    quick: bool = False
    settings: IntegratorSettings = field(default_factory=IntegratorSettings)
    _sweeps: dict[str, SweepResult] = field(default_factory=dict, repr=False)

    @property
    def mu_values(self) -> tuple[float, ...]:
        return QUICK_MU_VALUES if self.quick else DEFAULT_MU_VALUES

    def sweep(self, name: str) -> SweepResult:
        if name not in self._sweeps:
            builders = {"deformable": presets.deformable_sweep, "rigid_shell": presets.rigid_shell_sweep}
            cfg = builders[name](self.mu_values)
            if self.quick:
                cfg = cfg.model_copy(update={"audit_grid_size": QUICK_AUDIT_GRID_SIZE})
            logger.info("running the %s sweep over mu=%s", name, list(cfg.mu_values))
            self._sweeps[name] = run_sweep(cfg, self.settings)
        return self._sweeps[name]


@dataclass(frozen=True)
class Property:
    id: int
    name: str
    check: Callable[[SuiteContext], Outcome]


PROPERTIES: dict[int, Property] = {}


def register(id: int, name: str) -> Callable[[Callable[[SuiteContext], Outcome]], Callable[[SuiteContext], Outcome]]:
    def decorator(check: Callable[[SuiteContext], Outcome]) -> Callable[[SuiteContext], Outcome]:
        PROPERTIES[id] = Property(id, name, check)
        return check

    return decorator


def _failed_members(sweep: SweepResult) -> list[str]:
    return [f"mu={entry.mu!r}: {entry.error}" for entry in sweep.failures]


def _non_increasing(values: list[float], slack: float) -> bool:
    return all(later <= (1.0 + slack) * earlier for earlier, later in zip(values, values[1:]))


# ==================== Properties ====================

@register(1, "no_contact")
def no_contact(ctx: SuiteContext) -> Outcome:
    metrics: dict[str, Any] = {}
    problems = []
    for name in ("rigid_shell", "deformable"):
        sweep = ctx.sweep(name)
        problems += _failed_members(sweep)
        for entry in sweep.completed:
            h_min = locate_events(entry.trajectory, [EventKind.MIN_DISTANCE])[0].state.h
            metrics[f"{name} mu={entry.mu!r}"] = h_min
            if not h_min > 0:
                problems.append(f"{name} mu={entry.mu!r}: min h = {h_min!r}")
    if problems:
        return False, "; ".join(problems), metrics
    return True, f"min h > 0 on {len(metrics)} runs (smallest {min(metrics.values()):.3e} m)", metrics


@register(2, "energy_identity")
def energy_identity(ctx: SuiteContext) -> Outcome:
    metrics: dict[str, Any] = {}
    problems = []
    for name in ("rigid_shell", "deformable"):
        sweep = ctx.sweep(name)
        problems += _failed_members(sweep)
        for entry in sweep.completed:
            report = energy_residual(entry.trajectory)
            metrics[f"{name} mu={entry.mu!r}"] = report.relative
            if not report.relative <= ENERGY_RESIDUAL_BOUND:
                problems.append(f"{name} mu={entry.mu!r}: residual {report.relative:.3e} F(0)")

    reference_run = presets.deformable_config(CONVERGENCE_MU)
    explicit = ctx.settings.model_copy(update={"method": "dopri54"})
    coarse = energy_residual(integrate(reference_run, CONVERGENCE_T_END, explicit)).max_abs
    fine = energy_residual(
        integrate(reference_run, CONVERGENCE_T_END, explicit.tightened(TOLERANCE_TIGHTENING))
    ).max_abs
    shrink = coarse / fine if fine > 0 else math.inf
    metrics["shrink"] = shrink
    if shrink < MIN_RESIDUAL_SHRINK:
        problems.append(f"residual shrinks {shrink:.2f}x for {TOLERANCE_TIGHTENING:g}x tighter tolerances")

    study = self_convergence(
        reference_run, CONVERGENCE_T_END, explicit, TOLERANCE_TIGHTENING, REFERENCE_TIGHTENING
    )
    metrics["distance_ratio"] = study.ratio
    metrics["order"] = study.order
    if study.ratio < MIN_DISTANCE_SHRINK:
        problems.append(f"distance shrinks {study.ratio:.2f}x for {TOLERANCE_TIGHTENING:g}x tighter tolerances")
    if not study.order >= MIN_CONVERGENCE_ORDER:
        problems.append(f"observed order {study.order:.2f}")

    if problems:
        return False, "; ".join(problems), metrics
    worst = max(value for key, value in metrics.items() if key.startswith(("rigid_shell", "deformable")))
    return True, f"worst residual {worst:.3e} F(0), shrink {shrink:.1f}x, order {study.order:.2f}", metrics


@register(3, "rigid_body_monotone")
def rigid_body_monotone(ctx: SuiteContext) -> Outcome:
    cfg = presets.rigid_body_config()
    traj = integrate(cfg, DEFAULT_T_END, ctx.settings)
    grid = np.linspace(traj.t_start, traj.t_end, max(len(traj) * 4, 2))
    h = traj.evaluate(grid)[:, 0]
    rise = float(np.max(h - np.minimum.accumulate(h)))
    allowed = MONOTONE_SLACK * ctx.settings.abs_tol
    metrics = {"max_rise": rise, "h_end": float(h[-1])}
    if rise > allowed:
        return False, f"h rises by {rise:.3e} m (allowed {allowed:.1e})", metrics
    return True, f"h non-increasing, largest rise {rise:.1e} m", metrics


@register(4, "hit_and_stick")
def hit_and_stick(ctx: SuiteContext) -> Outcome:
    sweep = ctx.sweep("rigid_shell")
    problems = _failed_members(sweep)
    if problems:
        return False, "; ".join(problems), {}
    rows = sweep_summary(sweep)
    dev_h = [row.dev_h for row in rows]
    dev_xi = [row.dev_xi for row in rows]
    approach = [row.dev_xi_approach for row in rows]
    metrics = {"dev_h": dev_h, "dev_xi": dev_xi, "dev_xi_approach": approach}
    if not _non_increasing(dev_h, TREND_SLACK):
        problems.append(f"h deviation does not decrease: {dev_h}")
    if not _non_increasing(approach, TREND_SLACK):
        problems.append(f"xi deviation before t0 does not decrease: {approach}")
    if not _non_increasing(dev_xi, TREND_SLACK):
        problems.append(f"xi deviation does not decrease: {dev_xi}")
    if problems:
        return False, "; ".join(problems), metrics
    return True, f"deviations fall to {dev_h[-1]:.2e} (h), {dev_xi[-1]:.2e} (xi)", metrics


@register(5, "physical_rebound")
def physical_rebound(ctx: SuiteContext) -> Outcome:
    deformable = ctx.sweep("deformable")
    rigid = ctx.sweep("rigid_shell")
    problems = _failed_members(deformable) + _failed_members(rigid)
    if problems:
        return False, "; ".join(problems), {}

    missing = [entry.mu for entry in deformable.entries if not detect_rebound(entry.trajectory).rebounded]
    if missing:
        problems.append(f"no rebound for mu in {missing}")

    deformable_verdict = physical_rebound_verdict(deformable)
    rigid_verdict = physical_rebound_verdict(rigid)
    heights = [height for _, height in deformable_verdict.heights]
    metrics = {
        "deformable": deformable_verdict.verdict.value,
        "rigid_shell": rigid_verdict.verdict.value,
        "deformable_heights": heights,
        "rigid_heights": [height for _, height in rigid_verdict.heights],
    }
    if not deformable_verdict.physical:
        problems.append(f"deformable verdict {deformable_verdict.verdict.value}")
    elif heights[-1] < (1.0 - TREND_SLACK) * heights[-2]:
        problems.append(f"deformable rebound height still falling: {heights[-2]:.4g} -> {heights[-1]:.4g}")
    if rigid_verdict.verdict is not Verdict.NOT_PHYSICAL:
        problems.append(f"rigid shell verdict {rigid_verdict.verdict.value}")

    if problems:
        return False, "; ".join(problems), metrics
    return True, "deformable: physical rebound; rigid shell: none", metrics


@register(6, "drag_closed_form")
def drag_closed_form(ctx: SuiteContext) -> Outcome:
    metrics: dict[str, Any] = {}
    worst = 0.0
    for dim in (2, 3):
        geom = BodyGeometry(alpha=1.0, gamma=1.0 / (2.0 * CLOSED_FORM_RADIUS), dim=dim)
        for h in CLOSED_FORM_HEIGHTS:
            quadrature = drag_laws.lubrication_shape_factor(geom, h)
            exact = drag_laws.analytic_ball(CLOSED_FORM_RADIUS, h, dim)
            error = abs(quadrature - exact) / exact
            metrics[f"N={dim} h={h!r}"] = quadrature
            worst = max(worst, error)
    metrics["worst_relative_error"] = worst
    if worst > DRAG_CLOSED_FORM_RTOL:
        return False, f"relative error {worst:.3e} above {DRAG_CLOSED_FORM_RTOL:g}", metrics
    return True, f"worst relative error {worst:.1e}", metrics


@register(7, "asymptotic_exponents")
def asymptotic_exponents(ctx: SuiteContext) -> Outcome:
    heights = np.geomspace(*EXPONENT_FIT_HEIGHTS, 9)
    metrics: dict[str, Any] = {}
    problems = []
    for dim in (2, 3):
        for alpha in EXPONENT_FIT_ALPHAS:
            geom = BodyGeometry(alpha=alpha, gamma=1.0, dim=dim)
            values = [drag_laws.lubrication_shape_factor(geom, float(h)) for h in heights]
            slope = float(np.polyfit(np.log(heights), np.log(values), 1)[0])
            expected = -3 * alpha / (1 + alpha) if dim == 2 else (1 - 3 * alpha) / (1 + alpha)
            metrics[f"N={dim} alpha={alpha!r}"] = slope
            if abs(slope - expected) > EXPONENT_FIT_TOL:
                problems.append(f"N={dim} alpha={alpha!r}: slope {slope:.4f}, expected {expected:.4f}")

    try:
        drag_laws.reduced_integral(BodyGeometry(alpha=1.0 / 3.0, gamma=1.0, dim=3))
    except DivergentIntegralError:
        metrics["N=3 alpha=1/3"] = "DIVERGENT_INTEGRAL"
    else:
        problems.append("N=3 alpha=1/3 did not raise DIVERGENT_INTEGRAL")

    if problems:
        return False, "; ".join(problems), metrics
    return True, f"{len(heights)}-point slopes within {EXPONENT_FIT_TOL}", metrics


@register(8, "oscillator_limit")
def oscillator_limit(ctx: SuiteContext) -> Outcome:
    spring = presets.reference_spring()
    half_period = math.pi * math.sqrt(spring.m / spring.k)
    points = turning_points(spring, presets.reference_initial().h_dot)
    metrics: dict[str, Any] = {"t_plus": points.t_plus, "t_minus": points.t_minus, "expected": half_period}
    problems = []
    for label, value in (("t+", points.t_plus), ("t-", points.t_minus)):
        if abs(value - half_period) / half_period > TURNING_TIME_RTOL:
            problems.append(f"{label} = {value:.9g}, expected {half_period:.9g}")

    sweep = ctx.sweep("rigid_shell")
    entry = sweep.entries[-1]
    if entry.failed:
        problems.append(f"mu={entry.mu!r}: {entry.error}")
    else:
        t_from = LimitProfiles.for_config(entry.trajectory.config).t0 + POST_CONTACT_MARGIN
        spacing = oscillation_period(entry.trajectory, t_from) / 2.0
        metrics["crossing_spacing"] = spacing
        if not abs(spacing - half_period) / half_period <= HALF_PERIOD_RTOL:
            problems.append(f"xi_dot crossings {spacing:.6g} s apart at mu={entry.mu!r}")

    if problems:
        return False, "; ".join(problems), metrics
    return True, f"turning times and stuck oscillation match pi*sqrt(m/k) = {half_period:.6f} s", metrics


@register(9, "assumption_audit")
def assumption_audit(ctx: SuiteContext) -> Outcome:
    metrics: dict[str, Any] = {}
    problems = []
    for law in (PrototypeD1(c=20.0), PrototypeD2()):
        name = drag_laws.law_name(law)
        inside = drag_laws.assumption_audit(law).check("D.4")
        outside = drag_laws.assumption_audit(law, h_grid=[2.0]).check("D.4")
        metrics[name] = {"h<=1": inside.status.value, "h=2": outside.status.value}
        if inside.status is not CheckStatus.PASS:
            problems.append(f"{name}: D.4 {inside.status.value} on (0, 1]")
        if outside.status is not CheckStatus.FAIL or not outside.witness:
            problems.append(f"{name}: D.4 at h=2 should fail with a witness")

    rigid = RigidPower(C=1.0, alpha=1.5)
    d2 = drag_laws.assumption_audit(rigid).check("D.2")
    metrics["rigid_power D.2"] = d2.status.value
    if d2.status is not CheckStatus.PASS:
        problems.append(f"rigid_power: D.2 {d2.status.value} at equality")

    if problems:
        return False, "; ".join(problems), metrics
    return True, "prototypes monotone for h <= 1 and not at h = 2", metrics


# ==================== Runner ====================

def property_ids() -> list[int]:
    return sorted(PROPERTIES)


def run_property(prop: Property, ctx: SuiteContext) -> PropertyResult:
    started = time.perf_counter()
    try:
        passed, detail, metrics = prop.check(ctx)
    except ReboundLabError as exc:
        passed, detail, metrics = False, f"{exc.code}: {exc.message}", {}
    duration = time.perf_counter() - started
    logger.info("property %d %s: %s (%.1fs)", prop.id, prop.name, "PASS" if passed else "FAIL", duration)
    return PropertyResult(
        id=prop.id, name=prop.name, passed=passed, detail=detail, metrics=metrics, duration=duration
    )


def run_suite(
    quick: bool = False,
    only: Optional[Iterable[int]] = None,
    settings: Optional[IntegratorSettings] = None,
) -> SuiteReport:
    """Run the selected properties (all by default) in id order"""
    selected = sorted(set(only)) if only else property_ids()
    unknown = [pid for pid in selected if pid not in PROPERTIES]
    if unknown:
        raise DomainError(f"unknown property ids {unknown}", known=property_ids())
    ctx = SuiteContext(quick=quick, settings=settings or IntegratorSettings())
    results = tuple(run_property(PROPERTIES[pid], ctx) for pid in selected)
    return SuiteReport(quick=quick, results=results)
