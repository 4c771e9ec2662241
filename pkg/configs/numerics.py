# configs/numerics.py
"""
Numerical Configuration

Tolerances and fixed constants of the integrator, quadrature and audits.
These are deliberately not environment-overridable: identical inputs must
reproduce identical outputs.
"""


# ==================== Integrator ====================
DEFAULT_REL_TOL = 1e-8
DEFAULT_ABS_TOL = 1e-10
DEFAULT_MAX_REJECTIONS = 50
INITIAL_STEP_FRACTION = 1e-6  # of the integration span
MAX_STEP_FRACTION = 1e-2  # of the integration span, when max_step is unset
STIFFNESS_STEP_FRACTION = 1e-14  # of t_end
DEFAULT_MAX_STEPS = 20_000  # explicit steps before "auto" switches to the implicit solver
IMPLICIT_TOL_FACTOR = 0.1  # Radau tolerances relative to the explicit ones (RMS vs max error norm)

# Step-size controller (Dormand-Prince PI control)
STEP_SAFETY = 0.9
STEP_MIN_FACTOR = 0.2
STEP_MAX_FACTOR = 10.0
PI_BETA = 0.04


# ==================== Events ====================
EVENT_ROOT_TOL = 1e-12  # seconds
EVENT_SUBSAMPLES = 4  # dense-output probes per accepted step


# ==================== Quadrature ====================
DEFAULT_QUAD_TOL = 1e-8
QUAD_SUBDIVISION_LIMIT = 500
TURNING_POINT_QUAD_TOL = 1e-12


# ==================== Audits ====================
AUDIT_INTEGRAL_FLOOR = 1e-12
AUDIT_RELATIVE_SLACK = 1e-12
D6_MIN_TREND_SLOPE = 0.1


# ==================== Output ====================
CSV_FLOAT_FORMAT = "%.17g"
