"""Exception hierarchy shared by all quasilog modules."""


class QuasilogError(Exception):
    pass


class DomainError(QuasilogError, ValueError):
    """Argument outside the domain of a map (negative t, y outside (0,1), ...)."""


class ConfigurationError(QuasilogError, ValueError):
    """Geometry or weight configuration violating a structural hypothesis."""


class PreconditionError(QuasilogError, ValueError):
    pass


class ConvergenceError(QuasilogError, RuntimeError):
    """An iteration ran out of budget.  ``residual`` holds the last residual seen."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class NumericError(QuasilogError, ArithmeticError):
    pass
