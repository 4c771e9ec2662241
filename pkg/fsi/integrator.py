# fsi/integrator.py
"""
Adaptive integration of the model ODE.

- Dormand-Prince 5(4) with PI step-size control on the componentwise max
  error norm is the primary scheme
- positivity of h is enforced by rejecting and halving trial steps
  (stage values, end state and dense-output probes), never by clamping
- the dissipation ledger is the fifth state component and must not decrease
- quartic dense output on every accepted step
- near-wall stiffness: method "auto" hands a run that exhausts its explicit
  step budget to scipy's Radau, integrating log h so h stays positive
"""

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import integrate as scipy_integrate
from scipy import optimize

from configs.numerics import (
    EVENT_ROOT_TOL,
    EVENT_SUBSAMPLES,
    IMPLICIT_TOL_FACTOR,
    INITIAL_STEP_FRACTION,
    MAX_STEP_FRACTION,
    PI_BETA,
    STEP_MAX_FACTOR,
    STEP_MIN_FACTOR,
    STEP_SAFETY,
    STIFFNESS_STEP_FRACTION,
)
from fsi import core_model
from fsi.core_model import H, H_DOT, LEDGER, STATE_SIZE, XI, XI_DOT
from fsi.errors import DomainError, DragOverflowError, NonpositiveDistanceError, StepFailureError
from fsi.log import get_logger
from schema import (
    Event,
    EventKind,
    IntegratorSettings,
    ConvergenceReport,
    ModelConfig,
    ResidualReport,
    State,
    TerminationReason,
)

logger = get_logger(__name__)


# ==================== Dormand-Prince tableau ====================

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])

# y(t + x*dt) = y + dt * (K.T @ P) @ [x, x^2, x^3, x^4]
P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

ERROR_EXPONENT = 1.0 / 5.0
PI_ALPHA = ERROR_EXPONENT - 0.75 * PI_BETA

_PROBE_X = np.array([0.25, 0.5, 0.75])
_PROBE_POWERS = np.vstack([_PROBE_X, _PROBE_X**2, _PROBE_X**3, _PROBE_X**4])
# rounding slack of the interpolated ledger, relative to its size
LEDGER_ROUNDING = 16 * np.finfo(float).eps

COMPONENTS = {"h": H, "h_dot": H_DOT, "xi": XI, "xi_dot": XI_DOT, "ledger": LEDGER}


def _powers(x: np.ndarray) -> np.ndarray:
    return np.stack([x, x * x, x**3, x**4], axis=-1)


# ==================== Trajectory ====================

@dataclass(frozen=True)
class IntegratorStats:
    accepted: int = 0
    rejected: int = 0
    positivity_rejections: int = 0
    rhs_evaluations: int = 0
    min_step: float = math.inf


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Accepted samples plus per-step interpolation coefficients.

    `y` has shape (n, 5) in core_model state layout; `dense` has shape
    (n - 1, 5, 4) with y(t_i + x (t_{i+1} - t_i)) = y_i + dense_i @ [x, x^2, x^3, x^4].
    When `log_distance` is set the h row of `dense` interpolates log h instead.
    Arrays are read-only.
    """

    config: ModelConfig
    t: np.ndarray
    y: np.ndarray
    dense: np.ndarray
    termination: TerminationReason = TerminationReason.TIME_END
    settings: Optional[IntegratorSettings] = None
    warnings: tuple[str, ...] = ()
    stats: IntegratorStats = field(default_factory=IntegratorStats)
    method: str = "dopri54"
    log_distance: bool = False

    def __post_init__(self) -> None:
        for array in (self.t, self.y, self.dense):
            array.setflags(write=False)

    @classmethod
    def from_samples(
        cls,
        config: ModelConfig,
        t: Sequence[float],
        y: np.ndarray,
        termination: TerminationReason = TerminationReason.TIME_END,
    ) -> "Trajectory":
        """Trajectory with linear interpolation between the given samples"""
        times = np.array(t, dtype=float)
        states = np.array(y, dtype=float).reshape(len(times), STATE_SIZE)
        dense = np.zeros((max(len(times) - 1, 0), STATE_SIZE, 4))
        if len(times) > 1:
            dense[:, :, 0] = np.diff(states, axis=0)
        return cls(config=config, t=times, y=states, dense=dense, termination=termination)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def t_start(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def h(self) -> np.ndarray:
        return self.y[:, H]

    @property
    def ledger(self) -> np.ndarray:
        return self.y[:, LEDGER]

    @property
    def final_state(self) -> State:
        return core_model.to_state(self.t[-1], self.y[-1])

    def samples(self) -> list[State]:
        return [core_model.to_state(ti, yi) for ti, yi in zip(self.t, self.y)]

    def evaluate(self, times: Iterable[float] | float) -> np.ndarray:
        """Dense-output states at `times`, shape (len(times), 5)"""
        query = np.atleast_1d(np.asarray(times, dtype=float))
        span = EVENT_ROOT_TOL + 1e-12 * max(1.0, abs(self.t_end))
        if query.size and (query.min() < self.t_start - span or query.max() > self.t_end + span):
            raise DomainError(
                f"dense output requested outside [{self.t_start}, {self.t_end}]",
                t_min=float(query.min()),
                t_max=float(query.max()),
            )
        if len(self.t) == 1:
            return np.repeat(self.y[:1], query.size, axis=0)

        index = np.clip(np.searchsorted(self.t, query, side="right") - 1, 0, len(self.t) - 2)
        width = self.t[index + 1] - self.t[index]
        x = np.clip((query - self.t[index]) / width, 0.0, 1.0)
        increment = np.einsum("nij,nj->ni", self.dense[index], _powers(x))
        if not self.log_distance:
            return self.y[index] + increment
        out = self.y[index] + increment
        out[:, H] = self.y[index, H] * np.exp(increment[:, H])
        return out

    def value_at(self, t: float, component: str = "h") -> float:
        return float(self.evaluate(t)[0, COMPONENTS[component]])

    def state_at(self, t: float) -> State:
        return core_model.to_state(t, self.evaluate(t)[0])

    def energy(self) -> np.ndarray:
        return core_model.energy_array(self.y, self.config)

    def residual(self) -> np.ndarray:
        """F(t) + ledger(t) - F(0) per sample"""
        F = self.energy()
        return F + self.y[:, LEDGER] - F[0]


# ==================== Integration ====================

class _StepRejected(Exception):
    pass


class _StepBudgetSpent(Exception):
    def __init__(self, t: float, steps: int, warnings: list[str]):
        super().__init__(f"{steps} explicit steps spent by t={t!r}")
        self.t = t
        self.steps = steps
        self.warnings = warnings


def _stiffness_floor(t_end: float) -> float:
    return STIFFNESS_STEP_FRACTION * max(abs(t_end), 1.0)


def _single_sample(cfg: ModelConfig, settings: IntegratorSettings) -> Trajectory:
    return Trajectory(
        config=cfg,
        t=np.array([cfg.initial.t]),
        y=core_model.initial_vector(cfg)[None, :],
        dense=np.zeros((0, STATE_SIZE, 4)),
        settings=settings,
    )


def _clip_at_level(y: np.ndarray, Q: np.ndarray, dt: float, level: float) -> tuple[float, np.ndarray]:
    """Fraction x of the step where y[H] + Q[H] @ powers(x) reaches `level`, and Q rescaled to [0, x]"""
    x_cross = optimize.bisect(
        lambda x: y[H] + Q[H] @ _powers(np.array(x)) - level, 0.0, 1.0,
        xtol=EVENT_ROOT_TOL / max(dt, EVENT_ROOT_TOL),
    )
    return float(x_cross), Q * (x_cross ** np.arange(1, 5))


def integrate(
    cfg: ModelConfig,
    t_end: float,
    settings: Optional[IntegratorSettings] = None,
    stop_below: Optional[float] = None,
) -> Trajectory:
    """
    Integrate `cfg` from cfg.initial.t to t_end.

    `stop_below` ends the run (termination EVENT) at the first time h drops
    to that level. Raises StepFailureError, carrying the partial trajectory,
    when one step needs more than settings.max_rejections retries or the
    implicit solver gives up.
    """
    settings = settings or IntegratorSettings()
    t0 = cfg.initial.t
    if t_end < t0:
        raise DomainError(f"t_end={t_end!r} precedes the initial time {t0!r}", t_end=t_end)
    if t_end == t0:
        return _single_sample(cfg, settings)

    if settings.method == "radau":
        return _integrate_implicit(cfg, t_end, settings, stop_below, [])

    budget = settings.max_steps if settings.method == "auto" else None
    try:
        return _integrate_explicit(cfg, t_end, settings, stop_below, budget)
    except _StepBudgetSpent as spent:
        message = (
            f"STIFFNESS_WARNING: {spent.steps} explicit steps reached only t={spent.t:.9g}; "
            "rerunning with the implicit Radau solver"
        )
        logger.warning(message)
        return _integrate_implicit(cfg, t_end, settings, stop_below, spent.warnings + [message])


def _integrate_explicit(
    cfg: ModelConfig,
    t_end: float,
    settings: IntegratorSettings,
    stop_below: Optional[float],
    budget: Optional[int],
) -> Trajectory:
    t0 = cfg.initial.t
    f = core_model.make_rhs(cfg)
    y = core_model.initial_vector(cfg)
    times = [t0]
    states = [y]
    dense: list[np.ndarray] = []
    warnings: list[str] = []

    span = t_end - t0
    max_step = settings.max_step or MAX_STEP_FRACTION * span
    step = min(settings.initial_step or INITIAL_STEP_FRACTION * span, max_step)
    stiffness_floor = _stiffness_floor(t_end)

    accepted = rejected = positivity_rejections = 0
    evaluations = 1
    min_step = math.inf
    err_prev = 1e-4
    stiff_reported = False
    termination = TerminationReason.TIME_END

    t = t0
    k0 = f(t, y)
    K = np.empty((7, STATE_SIZE))

    def partial() -> Trajectory:
        return Trajectory(
            config=cfg, t=np.array(times), y=np.array(states),
            dense=np.array(dense).reshape(-1, STATE_SIZE, 4),
            termination=TerminationReason.FAILURE, settings=settings,
            warnings=tuple(warnings),
            stats=IntegratorStats(accepted, rejected, positivity_rejections, evaluations, min_step),
        )

    while t < t_end:
        if budget is not None and accepted + rejected >= budget:
            raise _StepBudgetSpent(t, accepted + rejected, warnings)

        attempts = 0
        step_rejected = False

        while True:
            step = min(step, max_step, t_end - t)
            t_new = t + step if t + step < t_end else t_end
            if t_new <= t:
                raise StepFailureError(
                    f"step size underflow at t={t!r}", t=t,
                    state=core_model.to_state(t, y), trajectory=partial(),
                )

            if step < stiffness_floor and t_new < t_end and not stiff_reported:
                message = f"STIFFNESS_WARNING: step {step:.3e} s at t={t:.9g} below {stiffness_floor:.1e} s"
                warnings.append(message)
                logger.warning(message)
                stiff_reported = True

            try:
                K[0] = k0
                for s in range(1, 6):
                    y_stage = y + step * (A[s] @ K[:s])
                    if not y_stage[H] > 0:
                        raise _StepRejected("stage")
                    K[s] = f(t + C[s] * step, y_stage)
                evaluations += 5

                y_new = y + step * (B @ K[:6])
                if not y_new[H] > 0 or y_new[LEDGER] < y[LEDGER]:
                    raise _StepRejected("end state")
                K[6] = f(t_new, y_new)
                evaluations += 1
                if not np.all(np.isfinite(K)):
                    raise _StepRejected("non-finite stage")

                Q = step * (K.T @ P)
                if not np.all(y[H] + Q[H] @ _PROBE_POWERS > 0):
                    raise _StepRejected("dense output")
                ledger = np.concatenate(([y[LEDGER]], y[LEDGER] + Q[LEDGER] @ _PROBE_POWERS, [y_new[LEDGER]]))
                if np.any(np.diff(ledger) < -LEDGER_ROUNDING * max(1.0, abs(y_new[LEDGER]))):
                    raise _StepRejected("ledger decreases inside the step")
            except (_StepRejected, NonpositiveDistanceError, DragOverflowError):
                positivity_rejections += 1
                error = math.inf
                step *= 0.5
            else:
                scale = settings.abs_tol + settings.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
                error = float(np.max(np.abs(step * (K.T @ E)) / scale))
                if error <= 1.0:
                    break
                step *= max(STEP_MIN_FACTOR, STEP_SAFETY * error ** -ERROR_EXPONENT)

            rejected += 1
            attempts += 1
            step_rejected = True
            if attempts > settings.max_rejections:
                raise StepFailureError(
                    f"{attempts} rejections of the step at t={t!r}", t=t,
                    state=core_model.to_state(t, y), trajectory=partial(),
                )

        accepted += 1
        min_step = min(min_step, t_new - t)

        if stop_below is not None and y_new[H] <= stop_below < y[H]:
            x_cross, Q = _clip_at_level(y, Q, t_new - t, stop_below)
            t_new = t + x_cross * (t_new - t)
            y_new = y + Q @ np.ones(4)
            termination = TerminationReason.EVENT

        times.append(t_new)
        states.append(y_new)
        dense.append(Q)
        t, y, k0 = t_new, y_new, K[6].copy()

        if termination is TerminationReason.EVENT:
            break

        if error == 0.0:
            factor = STEP_MAX_FACTOR
        else:
            factor = STEP_SAFETY * error ** -PI_ALPHA * err_prev**PI_BETA
            factor = min(STEP_MAX_FACTOR, max(STEP_MIN_FACTOR, factor))
        if step_rejected:
            factor = min(1.0, factor)
        step *= factor
        err_prev = max(error, 1e-4)

    logger.debug(
        "integrated to t=%.6g: %d accepted, %d rejected (%d positivity)",
        t, accepted, rejected, positivity_rejections,
    )
    return Trajectory(
        config=cfg,
        t=np.array(times),
        y=np.array(states),
        dense=np.array(dense).reshape(-1, STATE_SIZE, 4),
        termination=termination,
        settings=settings,
        warnings=tuple(warnings),
        stats=IntegratorStats(accepted, rejected, positivity_rejections, evaluations, min_step),
    )


# ==================== Implicit fallback ====================

# Radau's dense output is a cubic; sampling it at four interior points
# recovers it exactly in the quartic [x, x^2, x^3, x^4] basis.
_FIT_X = np.array([0.25, 0.5, 0.75, 1.0])
_FIT_INVERSE_T = np.linalg.inv(_powers(_FIT_X)).T


def _log_distance_rhs(f: core_model.RhsKernel) -> core_model.RhsKernel:
    """The model ODE with h replaced by w = log h"""

    def g(t: float, w: np.ndarray) -> np.ndarray:
        y = np.array(w, dtype=float)
        y[H] = math.exp(w[H])
        dy = f(t, y)
        dy[H] = dy[H] / y[H]
        return dy

    return g


def _from_log(w: np.ndarray) -> np.ndarray:
    y = np.array(w, dtype=float)
    y[H] = math.exp(w[H])
    return y


def _integrate_implicit(
    cfg: ModelConfig,
    t_end: float,
    settings: IntegratorSettings,
    stop_below: Optional[float],
    warnings: list[str],
) -> Trajectory:
    t0 = cfg.initial.t
    span = t_end - t0
    max_step = settings.max_step or MAX_STEP_FRACTION * span
    first_step = min(settings.initial_step or INITIAL_STEP_FRACTION * span, max_step)

    w = core_model.initial_vector(cfg)
    w[H] = math.log(w[H])
    times = [t0]
    states = [_from_log(w)]
    dense: list[np.ndarray] = []
    termination = TerminationReason.TIME_END
    min_step = math.inf
    log_level = math.log(stop_below) if stop_below is not None and stop_below > 0 else None

    solver = scipy_integrate.Radau(
        _log_distance_rhs(core_model.make_rhs(cfg)), t0, w, t_end,
        max_step=max_step, first_step=first_step,
        rtol=IMPLICIT_TOL_FACTOR * settings.rel_tol, atol=IMPLICIT_TOL_FACTOR * settings.abs_tol,
    )

    def finish(reason: TerminationReason) -> Trajectory:
        return Trajectory(
            config=cfg,
            t=np.array(times),
            y=np.array(states),
            dense=np.array(dense).reshape(-1, STATE_SIZE, 4),
            termination=reason,
            settings=settings,
            warnings=tuple(warnings),
            stats=IntegratorStats(
                accepted=len(times) - 1, rhs_evaluations=solver.nfev, min_step=min_step
            ),
            method="radau",
            log_distance=True,
        )

    while solver.status == "running":
        try:
            message = solver.step()
        except (NonpositiveDistanceError, DragOverflowError) as exc:
            message = str(exc)
        if solver.status == "failed" or message is not None and solver.status != "finished":
            t = times[-1]
            raise StepFailureError(
                f"implicit solver stopped at t={t!r}: {message}", t=t,
                state=core_model.to_state(t, states[-1]), trajectory=finish(TerminationReason.FAILURE),
            )

        t_old, t_new = solver.t_old, solver.t
        dt = t_new - t_old
        samples = solver.dense_output()(t_old + _FIT_X * dt)
        Q = (samples - w[:, None]) @ _FIT_INVERSE_T
        w_new = np.array(solver.y, dtype=float)
        min_step = min(min_step, dt)

        if log_level is not None and w_new[H] <= log_level < w[H]:
            x_cross, Q = _clip_at_level(w, Q, dt, log_level)
            t_new = t_old + x_cross * dt
            w_new = w + Q @ np.ones(4)
            termination = TerminationReason.EVENT

        times.append(t_new)
        states.append(_from_log(w_new))
        dense.append(Q)
        w = w_new
        if termination is TerminationReason.EVENT:
            break

    logger.debug("implicit run reached t=%.6g in %d steps", times[-1], len(times) - 1)
    return finish(termination)


# ==================== Events ====================

def _probe_times(traj: Trajectory) -> np.ndarray:
    if len(traj.t) == 1:
        return traj.t.copy()
    fractions = np.arange(EVENT_SUBSAMPLES) / EVENT_SUBSAMPLES
    inner = traj.t[:-1, None] + np.diff(traj.t)[:, None] * fractions[None, :]
    return np.concatenate([inner.ravel(), traj.t[-1:]])


def _roots(traj: Trajectory, times: np.ndarray, values: np.ndarray, index: int, level: float) -> list[float]:
    shifted = values - level
    roots = []
    for i in range(len(times) - 1):
        left, right = shifted[i], shifted[i + 1]
        if left == 0.0:
            if i == 0 or shifted[i - 1] != 0.0:
                roots.append(float(times[i]))
        elif left * right < 0:
            roots.append(
                float(
                    optimize.bisect(
                        lambda s: traj.evaluate(s)[0, index] - level,
                        times[i], times[i + 1], xtol=EVENT_ROOT_TOL,
                    )
                )
            )
    return roots


def _event(traj: Trajectory, kind: EventKind, t: float, component: str) -> Event:
    return Event(kind=kind, t=t, state=traj.state_at(t), component=component)


def locate_events(
    traj: Trajectory,
    kinds: Iterable[EventKind],
    level: Optional[float] = None,
    component: str = "h_dot",
) -> list[Event]:
    """
    Events on the dense output, sorted by time.

    ZERO_VELOCITY looks at `component` (h_dot by default, xi_dot for the
    spring oscillation). THRESHOLD_CROSSING needs an h `level`.
    """
    kinds = set(kinds)
    times = _probe_times(traj)
    values = traj.evaluate(times)
    events: list[Event] = []

    if EventKind.MIN_DISTANCE in kinds:
        # last of tied minima, so a levelled-off approach ends at t_end
        i = len(times) - 1 - int(np.argmin(values[::-1, H]))
        t_min = float(times[i])
        if 0 < i < len(times) - 1:
            lo, hi = times[i - 1], times[i + 1]
            if values[i - 1, H_DOT] < 0 < values[i + 1, H_DOT]:
                t_min = float(
                    optimize.bisect(
                        lambda s: traj.evaluate(s)[0, H_DOT], lo, hi, xtol=EVENT_ROOT_TOL
                    )
                )
        events.append(_event(traj, EventKind.MIN_DISTANCE, t_min, "h"))

    if EventKind.ZERO_VELOCITY in kinds:
        index = COMPONENTS[component]
        for t_root in _roots(traj, times, values[:, index], index, 0.0):
            events.append(_event(traj, EventKind.ZERO_VELOCITY, t_root, component))

    if EventKind.THRESHOLD_CROSSING in kinds:
        if level is None:
            raise DomainError("THRESHOLD_CROSSING needs an h level")
        for t_root in _roots(traj, times, values[:, H], H, level):
            events.append(_event(traj, EventKind.THRESHOLD_CROSSING, t_root, "h"))

    return sorted(events, key=lambda event: event.t)


# ==================== Diagnostics ====================

def energy_residual(traj: Trajectory) -> ResidualReport:
    """Worst |F(t) + ledger(t) - F(0)| over the accepted samples"""
    residual = np.abs(traj.residual())
    index = int(np.argmax(residual))
    return ResidualReport(
        max_abs=float(residual[index]),
        t_at=float(traj.t[index]),
        index=index,
        f0=float(traj.energy()[0]),
    )


def trajectory_distance(first: Trajectory, second: Trajectory, grid_size: int = 10_000) -> float:
    """Max-norm distance of (h, h_dot, xi, xi_dot) on a shared uniform grid"""
    start = max(first.t_start, second.t_start)
    stop = min(first.t_end, second.t_end)
    grid = np.linspace(start, stop, grid_size)
    delta = first.evaluate(grid)[:, :LEDGER] - second.evaluate(grid)[:, :LEDGER]
    return float(np.max(np.abs(delta)))


def self_convergence(
    cfg: ModelConfig,
    t_end: float,
    settings: IntegratorSettings,
    factor: float = 10.0,
    reference_factor: float = 1000.0,
    grid_size: int = 10_000,
) -> ConvergenceReport:
    """
    Runs at `settings` and `settings.tightened(factor)`, each measured
    against a reference run `reference_factor` times tighter still.
    """
    coarse = integrate(cfg, t_end, settings)
    fine = integrate(cfg, t_end, settings.tightened(factor))
    reference = integrate(cfg, t_end, settings.tightened(reference_factor))
    return ConvergenceReport(
        rel_tol=settings.rel_tol,
        factor=factor,
        coarse_distance=trajectory_distance(coarse, reference, grid_size),
        fine_distance=trajectory_distance(fine, reference, grid_size),
        coarse_steps=coarse.stats.accepted,
        fine_steps=fine.stats.accepted,
    )
