"""Exception hierarchy shared by the analytic engine, the simulator and the CLI."""


class ParameterError(ValueError):
    """A model, policy, rate or control parameter violates its invariant."""


class DomainError(ValueError):
    """A function was evaluated outside its mathematical domain."""


class NumericalError(ArithmeticError):
    """Base class for failures of an iterative or truncated computation."""


class ConvergenceError(NumericalError):
    """An iteration hit its cap before meeting its tolerance."""


class TruncationError(NumericalError):
    """A series hit its term cap before its tail-mass criterion was met."""


class QuadratureWarning(UserWarning):
    """Doubling the quadrature resolution moved the result more than allowed."""
