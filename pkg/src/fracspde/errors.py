"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): violated
preconditions, which are the caller's fault, and numerical non-convergence,
which is ours.
"""


class FracSPDEError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class PreconditionError(FracSPDEError, ValueError):
    """Inputs outside the documented domain of an operation."""

    exit_code = 2


class ConvergenceError(FracSPDEError, ArithmeticError):
    """A numerical route failed to meet its tolerance."""

    exit_code = 3


class GammaPoleError(PreconditionError):
    pass


class ShapeError(PreconditionError):
    pass


class PoleCollisionError(PreconditionError):
    pass


class NoAdmissibleLineError(PreconditionError):
    pass


class PoleTooCloseError(PreconditionError):
    pass


class PoleOrderError(PreconditionError):
    pass


class NotReducibleError(PreconditionError):
    pass


class ConditionError(PreconditionError):
    """A transform theorem's hypothesis does not hold."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class SingularPointError(PreconditionError):
    pass


class TailNotConvergedError(ConvergenceError):
    pass


class SeriesNotConvergedError(ConvergenceError):
    pass


class RouteDisagreementError(ConvergenceError):
    pass


class QuadratureError(ConvergenceError):
    pass
