# fsi/drag.py
"""
Drag shape factors D(h, xi).

Covers the coupled power law of the reference model, the two prototype laws,
the rigid power law, lubrication drag for a general near-contact profile
(quadrature-backed) and the closed-form disk / sphere drag. Also provides the
small-h exponent calculator and runtime audits of the drag assumptions
(D.1)-(D.6).

Powers are evaluated in log space so that an out-of-range value raises
DragOverflowError instead of silently turning into inf or 0.
"""

import math
import sys
import threading
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from configs.numerics import (
    AUDIT_INTEGRAL_FLOOR,
    AUDIT_RELATIVE_SLACK,
    D6_MIN_TREND_SLOPE,
    DEFAULT_QUAD_TOL,
    QUAD_SUBDIVISION_LIMIT,
)
from configs.experiment import XI_ENERGY_BOUND
from fsi.errors import (
    DivergentIntegralError,
    DomainError,
    DragOverflowError,
    NonpositiveDistanceError,
    QuadratureFailureError,
)
from fsi.log import get_logger
from schema import (
    AnalyticBall,
    AssumptionCheck,
    AuditParams,
    AuditReport,
    BodyGeometry,
    CheckStatus,
    ExponentDescriptor,
    ExponentRegime,
    LubricationQuadrature,
    PowerLawCoupled,
    PrototypeD1,
    PrototypeD2,
    RigidPower,
)

logger = get_logger(__name__)

DragFunction = Callable[[float, float], float]

_LOG_MAX = math.log(sys.float_info.max)
_LOG_MIN = math.log(sys.float_info.min)

DEFAULT_H_GRID = tuple(np.geomspace(1e-8, 1.0, 41))


# ==================== Power evaluation ====================

def _check_distance(h: float) -> None:
    if not h > 0:
        raise NonpositiveDistanceError(f"drag evaluated at h={h!r}", h=h)


def _scaled_power(scale: float, h: float, exponent: float, allow_underflow: bool) -> float:
    """scale * h**exponent through log space"""
    log_value = math.log(scale) + exponent * math.log(h)
    if log_value > _LOG_MAX:
        raise DragOverflowError(
            f"drag power overflows at h={h!r} (exponent {exponent!r})", h=h, exponent=exponent
        )
    if log_value < _LOG_MIN and not allow_underflow:
        raise DragOverflowError(
            f"drag power underflows at h={h!r} (exponent {exponent!r})", h=h, exponent=exponent
        )
    return math.exp(log_value)


# ==================== Lubrication integrals ====================

_integral_cache: dict[tuple[float, float, int, float], float] = {}
_integral_lock = threading.Lock()


def _lubrication_exponent(alpha: float, dim: int) -> float:
    if dim == 2:
        return -3.0 * alpha / (1.0 + alpha)
    return (1.0 - 3.0 * alpha) / (1.0 + alpha)


def _lubrication_prefactor(dim: int) -> float:
    # 12 times the outer-integral weight after exchanging the order of integration
    return 24.0 if dim == 2 else 6.0 * math.pi


def _quad(func: Callable[[float], float], lower: float, upper: float, quad_tol: float) -> float:
    result = integrate.quad(
        func, lower, upper, epsabs=0.0, epsrel=quad_tol, limit=QUAD_SUBDIVISION_LIMIT, full_output=1
    )
    if len(result) > 3:
        raise QuadratureFailureError(
            f"quadrature on [{lower}, {upper}] did not reach rel tol {quad_tol}: {result[3]}",
            estimate=result[0],
            abserr=result[1],
        )
    return float(result[0])


def _compute_reduced_integral(geom: BodyGeometry, quad_tol: float) -> float:
    alpha, gamma = geom.alpha, geom.gamma
    power = float(geom.dim)  # u^2 for N=2, u^3 for N=3

    def integrand(u: float) -> float:
        return u ** power / (1.0 + gamma * u ** (1.0 + alpha)) ** 3

    knee = gamma ** (-1.0 / (1.0 + alpha))
    value = _quad(integrand, 0.0, knee, quad_tol) + _quad(integrand, knee, math.inf, quad_tol)
    logger.debug(
        "lubrication integral alpha=%r gamma=%r dim=%d -> %r", alpha, gamma, geom.dim, value
    )
    return value


def reduced_integral(geom: BodyGeometry, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """
    h-independent part of the lubrication drag, computed once per geometry.

    With r = h^(1/(1+alpha)) u the gap becomes h (1 + gamma u^(1+alpha)) and
    the double integral collapses to int_0^inf u^N / (1 + gamma u^(1+alpha))^3 du
    up to a power of h.
    """
    if geom.dim == 3 and 3.0 * geom.alpha <= 1.0:
        raise DivergentIntegralError(
            f"lubrication integral diverges for N=3, alpha={geom.alpha!r} <= 1/3",
            alpha=geom.alpha,
        )

    key = (geom.alpha, geom.gamma, geom.dim, quad_tol)
    with _integral_lock:
        cached = _integral_cache.get(key)
        if cached is None:
            cached = _compute_reduced_integral(geom, quad_tol)
            _integral_cache[key] = cached
    return cached


def lubrication_shape_factor(
    geom: BodyGeometry, h: float, quad_tol: float = DEFAULT_QUAD_TOL
) -> float:
    """Lubrication drag D_lub with F_lub = -mu * D_lub * h_dot"""
    _check_distance(h)
    scale = _lubrication_prefactor(geom.dim) * reduced_integral(geom, quad_tol)
    return _scaled_power(scale, h, _lubrication_exponent(geom.alpha, geom.dim), False)


def analytic_ball(R: float, h: float, dim: int) -> float:
    """Closed-form drag of a disk (N=2) or a sphere (N=3) of radius R"""
    if not R > 0:
        raise DomainError(f"radius must be positive, got {R!r}", R=R)
    _check_distance(h)
    if dim == 2:
        return _scaled_power(3.0 * math.sqrt(2.0) * math.pi * R**1.5, h, -1.5, False)
    if dim == 3:
        return _scaled_power(6.0 * math.pi * R**2, h, -1.0, False)
    raise DomainError(f"dim must be 2 or 3, got {dim!r}", dim=dim)


def asymptotic_exponent(alpha: float, dim: int) -> ExponentDescriptor:
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}", alpha=alpha)
    if dim == 2:
        return ExponentDescriptor(regime=ExponentRegime.POWER, exponent=_lubrication_exponent(alpha, 2))
    if dim != 3:
        raise DomainError(f"dim must be 2 or 3, got {dim!r}", dim=dim)
    if math.isclose(3.0 * alpha, 1.0, rel_tol=1e-12):
        return ExponentDescriptor(regime=ExponentRegime.LOG)
    if 3.0 * alpha < 1.0:
        return ExponentDescriptor(regime=ExponentRegime.BOUNDED)
    return ExponentDescriptor(regime=ExponentRegime.POWER, exponent=_lubrication_exponent(alpha, 3))


# ==================== Law dispatch ====================

def compile_law(law: object) -> DragFunction:
    """
    Float closure D(h, xi) for the given law.

    Model attributes are read once here, so the integrator's inner loop only
    pays for the arithmetic.
    """
    match law:
        case PowerLawCoupled(c1=c1, c2=c2, c3=c3, M=M):
            scale, constant = c1 / M, c3 / M

            def power_law_coupled(h: float, xi: float) -> float:
                _check_distance(h)
                return _scaled_power(scale, h, -c2 * xi - 1.5, constant > 0) + constant

            return power_law_coupled

        case PrototypeD1(c=c):

            def prototype_d1(h: float, xi: float) -> float:
                _check_distance(h)
                return _scaled_power(1.0, h, -c * xi - 1.5, False)

            return prototype_d1

        case PrototypeD2():

            def prototype_d2(h: float, xi: float) -> float:
                _check_distance(h)
                return _scaled_power(1.0, h, -max(xi, 0.0) - 1.0, False)

            return prototype_d2

        case RigidPower(C=C, alpha=alpha):

            def rigid_power(h: float, xi: float) -> float:
                _check_distance(h)
                return _scaled_power(C, h, -alpha, False)

            return rigid_power

        case LubricationQuadrature(geom=geom, quad_tol=quad_tol):
            scale = _lubrication_prefactor(geom.dim) * reduced_integral(geom, quad_tol)
            exponent = _lubrication_exponent(geom.alpha, geom.dim)

            def lubrication(h: float, xi: float) -> float:
                _check_distance(h)
                return _scaled_power(scale, h, exponent, False)

            return lubrication

        case AnalyticBall(R=R, dim=dim):

            def ball(h: float, xi: float) -> float:
                return analytic_ball(R, h, dim)

            return ball

    raise DomainError(f"unknown drag law {law!r}")


def evaluate(law: object, h: float, xi: float) -> float:
    return compile_law(law)(h, xi)


def depends_on_xi(law: object) -> bool:
    match law:
        case PowerLawCoupled(c2=c2):
            return c2 != 0
        case PrototypeD1() | PrototypeD2():
            return True
    return False


def law_name(law: object) -> str:
    return getattr(law, "kind", type(law).__name__)


def flatness_margin(law: object, xi_sup: float) -> float:
    """
    Distance of xi_sup below 1/(2 c2).

    Positive means the exponent -c2 xi - 3/2 stays below -1 over the observed
    elongations, the flatness condition of the reference model.
    """
    match law:
        case PowerLawCoupled(c2=c):
            pass
        case PrototypeD1(c=c):
            pass
        case _:
            return math.inf
    if c == 0:
        return math.inf
    return 1.0 / (2.0 * c) - abs(xi_sup)


# ==================== Assumption audits ====================

def default_xi_grid(xi_sup: Optional[float] = None, points: int = 21) -> tuple[float, ...]:
    span = 1.5 * max(abs(xi_sup or 0.0), XI_ENERGY_BOUND)
    return tuple(np.linspace(-span, span, points))


def default_audit_params(law: object) -> AuditParams:
    """Constants under which each law is expected to satisfy its assumptions on h <= 1"""
    match law:
        case PowerLawCoupled(c1=c1, c2=c2, c3=c3, M=M) if c2 == 0:
            return AuditParams(
                c_lower=c1 / M, alpha_lower=1.5, delta1=1.0, delta2=1.0, gamma1=1.5,
                c1=c1 / M, envelope=(c1 / M, (c1 + c3) / M),
            )
        case PowerLawCoupled(c1=c1, c2=c, M=M):
            scale = c1 / M
        case PrototypeD1(c=c):
            scale = 1.0
        case PrototypeD2():
            return AuditParams(c_lower=1.0, alpha_lower=1.0, delta1=1.0, delta2=1.0, gamma1=1.0, c1=1.0)
        case RigidPower(C=C, alpha=alpha):
            return AuditParams(
                c_lower=C, alpha_lower=alpha, delta1=1.0, delta2=1.0, gamma1=alpha,
                c1=C, envelope=(C, C),
            )
        case _:
            # lubrication-type laws: D = K h^e exactly
            K = evaluate(law, 1.0, 0.0)
            e = math.log(evaluate(law, math.e, 0.0) / K)
            alpha = max(1.0, -e)
            return AuditParams(
                c_lower=K, alpha_lower=alpha, delta1=1.0, delta2=1.0, gamma1=alpha,
                c1=K, envelope=(K, K) if -e >= 1.0 else None,
            )
    return AuditParams(
        c_lower=scale, alpha_lower=1.0, delta1=1.0 / (4.0 * c), delta2=1.0 / (2.0 * c),
        gamma1=1.25, c1=scale,
    )


def _below(lhs: float, rhs: float) -> bool:
    """lhs <= rhs up to the audit slack"""
    return lhs <= rhs + AUDIT_RELATIVE_SLACK * max(abs(lhs), abs(rhs))


def _audit_d1(D: np.ndarray, h: np.ndarray, xi: np.ndarray) -> AssumptionCheck:
    quotients = []
    if len(h) > 1:
        quotients.append(np.abs(np.diff(D, axis=0)) / np.diff(h)[:, None])
    if len(xi) > 1:
        quotients.append(np.abs(np.diff(D, axis=1)) / np.diff(xi)[None, :])
    worst = max((float(q.max()) for q in quotients), default=0.0)
    if not math.isfinite(worst):
        return AssumptionCheck(name="D.1", status=CheckStatus.FAIL, detail="non-finite difference quotient")
    return AssumptionCheck(
        name="D.1", status=CheckStatus.PASS, detail=f"max difference quotient {worst:.6g}"
    )


def _audit_d2(D: np.ndarray, h: np.ndarray, xi: np.ndarray, params: AuditParams) -> AssumptionCheck:
    for i, hi in enumerate(h):
        bound = params.c_lower * hi ** (-params.alpha_lower)
        for j, xj in enumerate(xi):
            if not _below(bound, D[i, j]):
                return AssumptionCheck(
                    name="D.2", status=CheckStatus.FAIL,
                    detail=f"D < c h^-alpha at h={hi:.6g}, xi={xj:.6g}",
                    witness={"h": float(hi), "xi": float(xj), "D": float(D[i, j]), "bound": float(bound)},
                )
    return AssumptionCheck(
        name="D.2", status=CheckStatus.PASS,
        detail=f"D >= {params.c_lower:.6g} h^-{params.alpha_lower:.6g}",
    )


def _audit_d3(D: np.ndarray, h: np.ndarray, xi: np.ndarray, params: AuditParams) -> AssumptionCheck:
    for i, hi in enumerate(h):
        row = D[i]
        spread = float(row.max() - row.min())
        if spread > AUDIT_RELATIVE_SLACK * float(row.max()):
            j = int(np.argmax(row))
            return AssumptionCheck(
                name="D.3", status=CheckStatus.FAIL,
                detail=f"D depends on xi at h={hi:.6g}",
                witness={"h": float(hi), "xi": float(xi[j]), "spread": spread},
            )
    if params.envelope is None:
        return AssumptionCheck(
            name="D.3", status=CheckStatus.SKIPPED, detail="xi-independent, no envelope given"
        )
    low, high = params.envelope
    g = D[:, 0] * h ** params.alpha_lower
    for i, gi in enumerate(g):
        if not (_below(low, gi) and _below(gi, high)):
            return AssumptionCheck(
                name="D.3", status=CheckStatus.FAIL,
                detail=f"g(h) = {gi:.6g} outside [{low:.6g}, {high:.6g}] at h={h[i]:.6g}",
                witness={"h": float(h[i]), "g": float(gi)},
            )
    return AssumptionCheck(
        name="D.3", status=CheckStatus.PASS,
        detail=f"g(h) in [{float(g.min()):.6g}, {float(g.max()):.6g}]",
    )


def _audit_d4(D: np.ndarray, h: np.ndarray, xi: np.ndarray) -> AssumptionCheck:
    for i, hi in enumerate(h):
        for j in range(len(xi) - 1):
            if not _below(D[i, j], D[i, j + 1]):
                return AssumptionCheck(
                    name="D.4", status=CheckStatus.FAIL,
                    detail=f"D decreases in xi at h={hi:.6g}",
                    witness={
                        "h": float(hi),
                        "xi1": float(xi[j]),
                        "xi2": float(xi[j + 1]),
                        "D1": float(D[i, j]),
                        "D2": float(D[i, j + 1]),
                    },
                )
    return AssumptionCheck(name="D.4", status=CheckStatus.PASS, detail="non-decreasing in xi")


def _audit_d5(drag: DragFunction, h: np.ndarray, params: AuditParams) -> AssumptionCheck:
    for hi in h:
        value = drag(float(hi), -params.delta1)
        bound = params.c1 * hi ** (-params.gamma1)
        if not _below(bound, value):
            return AssumptionCheck(
                name="D.5", status=CheckStatus.FAIL,
                detail=f"D(h, -delta1) < c1 h^-gamma1 at h={hi:.6g}",
                witness={"h": float(hi), "D": value, "bound": float(bound)},
            )
    return AssumptionCheck(
        name="D.5", status=CheckStatus.PASS,
        detail=f"D(h, -{params.delta1:.6g}) >= {params.c1:.6g} h^-{params.gamma1:.6g}",
    )


def _audit_d6(
    drag: DragFunction, h: np.ndarray, params: AuditParams
) -> tuple[AssumptionCheck, tuple[tuple[float, float], ...], Optional[float]]:
    """
    Trend of I(h) = int_floor^h gamma(y)/y dy with gamma(y) = D(y, -delta2) y^gamma1.

    Integrated in s = log y; the limit condition is read as I decreasing with
    h and a positive log-log slope.
    """
    levels = np.unique(h[h > 10.0 * AUDIT_INTEGRAL_FLOOR])
    if len(levels) < 2:
        return (
            AssumptionCheck(name="D.6", status=CheckStatus.SKIPPED, detail="need two h levels above the floor"),
            (),
            None,
        )

    def gamma_of_log(s: float) -> float:
        y = math.exp(s)
        return drag(y, -params.delta2) * y**params.gamma1

    knots = np.concatenate(([math.log(AUDIT_INTEGRAL_FLOOR)], np.log(levels)))
    pieces = [
        integrate.quad(gamma_of_log, lo, hi, limit=QUAD_SUBDIVISION_LIMIT)[0]
        for lo, hi in zip(knots[:-1], knots[1:])
    ]
    values = np.cumsum(pieces)
    trend = tuple((float(hv), float(iv)) for hv, iv in zip(levels, values))

    if values[-1] == 0.0:
        return AssumptionCheck(name="D.6", status=CheckStatus.PASS, detail="gamma vanishes"), trend, None

    monotone = bool(np.all(np.diff(values) >= -AUDIT_RELATIVE_SLACK * np.abs(values[1:])))
    positive = values > 0
    slope = float(np.polyfit(np.log(levels[positive]), np.log(values[positive]), 1)[0]) if positive.sum() >= 2 else 0.0
    if monotone and slope >= D6_MIN_TREND_SLOPE:
        check = AssumptionCheck(
            name="D.6", status=CheckStatus.PASS,
            detail=f"integral shrinks with h, log-log slope {slope:.4f}",
        )
    else:
        check = AssumptionCheck(
            name="D.6", status=CheckStatus.FAIL,
            detail=f"integral does not vanish with h (log-log slope {slope:.4f})",
            witness={"h": trend[0][0], "integral": trend[0][1], "slope": slope},
        )
    return check, trend, slope


def assumption_audit(
    law: object,
    h_grid: Optional[Sequence[float]] = None,
    xi_grid: Optional[Sequence[float]] = None,
    params: Optional[AuditParams] = None,
) -> AuditReport:
    """
    Check (D.1)-(D.6) for `law` on the grid.

    Failures carry the witnessing grid point. Evaluation errors (overflow)
    fail (D.1) and skip the grid-based checks.
    """
    h = np.sort(np.asarray(h_grid if h_grid is not None else DEFAULT_H_GRID, dtype=float))
    xi = np.sort(np.asarray(xi_grid if xi_grid is not None else default_xi_grid(), dtype=float))
    if h.size == 0 or xi.size == 0 or not np.all(np.isfinite(h)) or not np.all(np.isfinite(xi)):
        raise DomainError("audit grids must be finite and non-empty")
    if not np.all(h > 0):
        raise NonpositiveDistanceError("audit h grid must lie in (0, h_max]")

    params = params or default_audit_params(law)
    drag = compile_law(law)

    try:
        D = np.array([[drag(float(hi), float(xj)) for xj in xi] for hi in h])
    except DragOverflowError as exc:
        failed = AssumptionCheck(
            name="D.1", status=CheckStatus.FAIL, detail=exc.message,
            witness={key: float(value) for key, value in exc.context.items()},
        )
        skipped = tuple(
            AssumptionCheck(name=name, status=CheckStatus.SKIPPED, detail="drag not evaluable on grid")
            for name in ("D.2", "D.3", "D.4", "D.5", "D.6")
        )
        return AuditReport(law=law_name(law), params=params, checks=(failed,) + skipped)

    d6, trend, slope = _audit_d6(drag, h, params)
    checks = (
        _audit_d1(D, h, xi),
        _audit_d2(D, h, xi, params),
        _audit_d3(D, h, xi, params),
        _audit_d4(D, h, xi),
        _audit_d5(drag, h, params),
        d6,
    )
    for check in checks:
        if check.status is CheckStatus.FAIL:
            logger.info("%s %s: %s", law_name(law), check.name, check.detail)
    return AuditReport(law=law_name(law), params=params, checks=checks, d6_trend=trend, d6_slope=slope)


# ==================== Drag table ====================

def drag_table(
    geom: BodyGeometry,
    h_min: float,
    h_max: float,
    points: int,
    quad_tol: float = DEFAULT_QUAD_TOL,
) -> list[dict[str, float | int | str]]:
    """
    Lubrication drag on a log-spaced h grid.

    D_analytic is the closed-form ball drag with R = 1/(2 gamma) when
    alpha = 1 and nan otherwise.
    """
    if not 0 < h_min <= h_max:
        raise DomainError(f"need 0 < h_min <= h_max, got {h_min!r}, {h_max!r}")
    if points < 1:
        raise DomainError(f"points must be >= 1, got {points!r}")

    exponent = asymptotic_exponent(geom.alpha, geom.dim).label()
    heights = np.geomspace(h_min, h_max, points) if points > 1 else np.array([h_min])
    radius = 1.0 / (2.0 * geom.gamma)
    rows: list[dict[str, float | int | str]] = []
    for h in heights:
        rows.append(
            {
                "h": float(h),
                "alpha": geom.alpha,
                "gamma": geom.gamma,
                "dim": geom.dim,
                "D_lub": lubrication_shape_factor(geom, float(h), quad_tol),
                "D_analytic": analytic_ball(radius, float(h), geom.dim) if geom.alpha == 1 else math.nan,
                "exponent": exponent,
            }
        )
    return rows
