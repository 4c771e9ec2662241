# fsi/errors.py
"""
Error hierarchy of the laboratory.

Every error carries a stable `code` (reported in logs, panels and the
manifest) and the process `exit_code` the CLI maps it to:
1 for parse / validation / domain refusal and I/O, 2 for numerical failure.
"""

from typing import Any, Optional


class ReboundLabError(Exception):
    """Base class for every error raised by the laboratory"""

    code = "ERROR"
    exit_code = 1

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict[str, Any]:
        result: dict[str, Any] = {"code": self.code, "message": self.message}
        if self.context:
            result["context"] = {key: repr(value) for key, value in self.context.items()}
        return result


# ==================== Domain refusals ====================

class DomainError(ReboundLabError):
    """Inputs outside the domain of an operation"""

    code = "DOMAIN_ERROR"


class DivergentIntegralError(DomainError):
    """Lubrication integral has no finite value (N=3, alpha <= 1/3)"""

    code = "DIVERGENT_INTEGRAL"


class UndefinedT0Error(DomainError):
    """The limit collision time needs a negative initial velocity"""

    code = "UNDEFINED_T0"


# ==================== Numerical failures ====================

class NumericalError(ReboundLabError):
    code = "NUMERICAL_ERROR"
    exit_code = 2


class NonpositiveDistanceError(NumericalError):
    """A state with h <= 0 reached the right-hand side or the drag law"""

    code = "NONPOSITIVE_DISTANCE"


class DragOverflowError(NumericalError):
    """A drag power left the representable floating-point range"""

    code = "OVERFLOW"


class QuadratureFailureError(NumericalError):
    code = "QUADRATURE_FAILURE"


class StepFailureError(NumericalError):
    """
    The integrator exhausted its rejection budget.

    `t` and `state` locate the failure; `trajectory` holds every sample
    accepted before it (termination reason FAILURE).
    """

    code = "STEP_FAILURE"

    def __init__(self, message: str, t: float, state: Any, trajectory: Optional[Any] = None):
        super().__init__(message, t=t, state=state)
        self.t = t
        self.state = state
        self.trajectory = trajectory


# ==================== Input / output ====================

class ConfigParseError(ReboundLabError):
    """Config file is not well-formed JSON"""

    code = "PARSE_ERROR"

    def __init__(self, message: str, path: str, line: int, column: int):
        super().__init__(f"{path}:{line}:{column}: {message}", path=path, line=line, column=column)
        self.path = path
        self.line = line
        self.column = column


class ConfigValidationError(ReboundLabError):
    """Config violates a field constraint or invariant"""

    code = "VALIDATION_ERROR"

    def __init__(self, message: str, field: str, constraint: str):
        super().__init__(f"{field}: {constraint}" if field else constraint, field=field)
        self.field = field
        self.constraint = constraint
        self.detail = message


class StorageError(ReboundLabError):
    """Reading or writing a file failed"""

    code = "IO_ERROR"

    def __init__(self, message: str, path: str):
        super().__init__(f"{path}: {message}", path=path)
        self.path = path
