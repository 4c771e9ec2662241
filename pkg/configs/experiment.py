# configs/experiment.py
"""
Experiment Configuration

Reference parameters of the reduced spring-mass model and the defaults of
the viscosity sweeps built on them.
"""


# ==================== Reference Model ====================
SHELL_MASS = 1.0  # M (kg)
INTERNAL_MASS = 8.2  # m (kg)
SPRING_STIFFNESS = 10000.0  # k (N/m)

DRAG_C1 = 0.1
DRAG_C2_DEFORMABLE = 20.0
DRAG_C2_RIGID = 0.0
DRAG_C3 = 7.4

RIGID_BODY_DRAG_C = 1.0
RIGID_BODY_DRAG_ALPHA = 1.5

INITIAL_DISTANCE = 0.3  # h0 (m)
INITIAL_VELOCITY = -0.5  # hdot0 (m/s), negative = towards the wall

DEFAULT_VISCOSITY = 0.1  # Pa*s


# ==================== Sweeps ====================
DEFAULT_MU_VALUES = (0.1, 0.05, 0.01, 0.005, 0.001)
QUICK_MU_VALUES = (0.1, 0.05, 0.01)
DEFAULT_T_END = 2.0  # seconds
DEFAULT_AUDIT_GRID_SIZE = 10_000
POST_CONTACT_MARGIN = 0.05  # seconds after t0 before comparing xi to its limit


# ==================== Rebound Verdict ====================
PERSISTENCE_FRACTION = 0.10  # of h0, rebound must stay above this
VANISHING_FRACTION = 0.01  # of h0, rebound considered gone below this
TREND_SLACK = 0.05  # allowed relative increase per sweep step


# ==================== Elongation Envelope ====================
XI_ENERGY_BOUND = 1.0 / 200.0
XI_ENVELOPE_SLACK = 1e-4


# ==================== Verify Suite ====================
QUICK_AUDIT_GRID_SIZE = 1_000
ENERGY_RESIDUAL_BOUND = 1e-6  # of F(0)
TOLERANCE_TIGHTENING = 10.0
MIN_RESIDUAL_SHRINK = 8.0
CONVERGENCE_MU = DEFAULT_VISCOSITY
CONVERGENCE_T_END = DEFAULT_T_END
REFERENCE_TIGHTENING = 1000.0  # reference run of the self-convergence study
MIN_DISTANCE_SHRINK = 8.0
MIN_CONVERGENCE_ORDER = 4.0
MONOTONE_SLACK = 10.0  # multiples of abs_tol
DRAG_CLOSED_FORM_RTOL = 1e-6
CLOSED_FORM_RADIUS = 0.2
CLOSED_FORM_HEIGHTS = (1e-3, 1e-2, 1e-1)
EXPONENT_FIT_HEIGHTS = (1e-6, 1e-4)
EXPONENT_FIT_ALPHAS = (0.5, 1.0, 2.0)
EXPONENT_FIT_TOL = 0.02
TURNING_TIME_RTOL = 1e-6
HALF_PERIOD_RTOL = 0.02
