# fsi/core_model.py
"""
Spring-mass shell model: spring law, right-hand side and energy functional.

State vector layout used by the integrator kernel:

    [h, h_dot, xi, xi_dot, ledger]

where `ledger` accumulates the dissipated energy so that
F(t) + ledger(t) = F(0) along exact solutions.
"""

import math
from typing import Callable, Sequence

import numpy as np

from fsi.drag import compile_law
from fsi.errors import NonpositiveDistanceError
from schema import (
    AssumptionCheck,
    CheckStatus,
    Derivative,
    ModelConfig,
    SimulationMode,
    SpringParams,
    State,
)

H, H_DOT, XI, XI_DOT, LEDGER = range(5)
STATE_SIZE = 5

RhsKernel = Callable[[float, np.ndarray], np.ndarray]


# ==================== Spring ====================

def spring_force(xi: float, p: SpringParams) -> float:
    """b(xi) = k xi / M"""
    return p.k * xi / p.M


def spring_energy(y: float, p: SpringParams) -> float:
    """B(y) = k y^2 / (2M), the primitive of b vanishing at 0"""
    return p.k * y * y / (2.0 * p.M)


def energy_xi_bound(p: SpringParams, hdot0: float) -> float:
    """|hdot0| / sqrt(k), the energy estimate of sup |xi|; inf without a spring"""
    return abs(hdot0) / math.sqrt(p.k) if p.k > 0 else math.inf


def spring_audit(p: SpringParams, y_grid: Sequence[float]) -> tuple[AssumptionCheck, ...]:
    """Check (B.1)-(B.4) for the linear spring on sampled elongations"""
    y = np.asarray(y_grid, dtype=float)
    b = p.k * y / p.M
    B = p.k * y * y / (2.0 * p.M)
    lipschitz = p.k / p.M

    checks = []

    slopes = np.abs(np.diff(b)) / np.maximum(np.abs(np.diff(y)), np.finfo(float).tiny)
    worst = float(slopes.max()) if slopes.size else 0.0
    checks.append(
        AssumptionCheck(
            name="B.1",
            status=CheckStatus.PASS if worst <= lipschitz * (1 + 1e-12) else CheckStatus.FAIL,
            detail=f"max slope {worst:.6g}, Lipschitz constant {lipschitz:.6g}",
        )
    )

    checks.append(
        AssumptionCheck(
            name="B.2",
            status=CheckStatus.PASS if p.k > 0 else CheckStatus.FAIL,
            detail="B grows like y^2" if p.k > 0 else "k = 0: B is identically zero",
        )
    )

    negative = np.flatnonzero(B < 0)
    checks.append(
        AssumptionCheck(
            name="B.3",
            status=CheckStatus.FAIL if negative.size else CheckStatus.PASS,
            detail="B >= 0" if not negative.size else "B < 0 on grid",
            witness={"y": float(y[negative[0]])} if negative.size else None,
        )
    )

    bad = np.flatnonzero((y != 0) & (b * y <= 0))
    checks.append(
        AssumptionCheck(
            name="B.4",
            status=CheckStatus.FAIL if bad.size else CheckStatus.PASS,
            detail="b(y) y > 0 for y != 0" if not bad.size else "b(y) y <= 0 on grid",
            witness={"y": float(y[bad[0]])} if bad.size else None,
        )
    )
    return tuple(checks)


# ==================== Right-hand side ====================

def _coupled_accel(
    h: float, h_dot: float, xi: float, mu: float, drag: Callable[[float, float], float],
    b_coef: float, a: float,
) -> tuple[float, float, float]:
    b = b_coef * xi
    D = drag(h, xi)
    dh_dot = -b - mu * D * h_dot
    return dh_dot, dh_dot - a * b, D


def rhs(s: State, cfg: ModelConfig) -> Derivative:
    if not s.h > 0:
        raise NonpositiveDistanceError(f"rhs evaluated at h={s.h!r}", h=s.h, t=s.t)

    drag = compile_law(cfg.drag)
    p = cfg.spring

    if cfg.mode is SimulationMode.RIGID_BODY:
        D = drag(s.h, 0.0)
        return Derivative(dh=s.h_dot, dh_dot=-(cfg.mu / p.m) * D * s.h_dot, dxi=0.0, dxi_dot=0.0)

    dh_dot, dxi_dot, _ = _coupled_accel(s.h, s.h_dot, s.xi, cfg.mu, drag, p.k / p.M, p.a)
    return Derivative(dh=s.h_dot, dh_dot=dh_dot, dxi=s.xi_dot, dxi_dot=dxi_dot)


def dissipation_rate(s: State, cfg: ModelConfig) -> float:
    """Time derivative of the ledger; F decays at exactly this rate"""
    if not s.h > 0:
        raise NonpositiveDistanceError(f"dissipation evaluated at h={s.h!r}", h=s.h, t=s.t)
    p = cfg.spring
    if cfg.mode is SimulationMode.RIGID_BODY:
        D = compile_law(cfg.drag)(s.h, 0.0)
        return 2.0 * (1.0 + p.a) * (cfg.mu / p.m) * D * s.h_dot**2
    D = compile_law(cfg.drag)(s.h, s.xi)
    return 2.0 * p.a * cfg.mu * D * s.h_dot**2


def make_rhs(cfg: ModelConfig) -> RhsKernel:
    """
    Array kernel f(t, y) over the five-component state.

    Raises NonpositiveDistanceError for h <= 0 and DragOverflowError from the
    drag law; the integrator treats both as a rejected trial step.
    """
    drag = compile_law(cfg.drag)
    p = cfg.spring
    mu = cfg.mu
    a = p.a

    if cfg.mode is SimulationMode.RIGID_BODY:
        damping = mu / p.m
        ledger_coef = 2.0 * (1.0 + a) * damping

        def rigid_body(t: float, y: np.ndarray) -> np.ndarray:
            h, h_dot = y[H], y[H_DOT]
            if not h > 0:
                raise NonpositiveDistanceError(f"h={h!r} at t={t!r}", h=h, t=t)
            D = drag(h, 0.0)
            return np.array(
                [h_dot, -damping * D * h_dot, 0.0, 0.0, ledger_coef * D * h_dot * h_dot]
            )

        return rigid_body

    b_coef = p.k / p.M
    ledger_coef = 2.0 * a * mu

    def coupled(t: float, y: np.ndarray) -> np.ndarray:
        h, h_dot, xi, xi_dot = y[H], y[H_DOT], y[XI], y[XI_DOT]
        if not h > 0:
            raise NonpositiveDistanceError(f"h={h!r} at t={t!r}", h=h, t=t)
        dh_dot, dxi_dot, D = _coupled_accel(h, h_dot, xi, mu, drag, b_coef, a)
        return np.array([h_dot, dh_dot, xi_dot, dxi_dot, ledger_coef * D * h_dot * h_dot])

    return coupled


# ==================== Energy ====================

def energy(s: State, cfg: ModelConfig) -> float:
    """F = (h_dot - xi_dot)^2 + a h_dot^2 + 2a B(xi)"""
    p = cfg.spring
    return (s.h_dot - s.xi_dot) ** 2 + p.a * s.h_dot**2 + 2.0 * p.a * spring_energy(s.xi, p)


def energy_array(y: np.ndarray, cfg: ModelConfig) -> np.ndarray:
    """F over an (n, 5) array of states"""
    p = cfg.spring
    h_dot, xi, xi_dot = y[:, H_DOT], y[:, XI], y[:, XI_DOT]
    return (h_dot - xi_dot) ** 2 + p.a * h_dot**2 + p.a * p.k * xi * xi / p.M


def initial_vector(cfg: ModelConfig) -> np.ndarray:
    s = cfg.initial
    return np.array([s.h, s.h_dot, s.xi, s.xi_dot, 0.0])


def to_state(t: float, y: np.ndarray) -> State:
    return State(
        t=float(t), h=float(y[H]), h_dot=float(y[H_DOT]), xi=float(y[XI]), xi_dot=float(y[XI_DOT])
    )
