"""Exception hierarchy shared by all modules."""


class WnlError(Exception):
    """Base class for every error raised by the package."""


class DomainError(WnlError, ValueError):
    """An argument lies outside the domain of an operation."""


class ZeroVector(DomainError):
    pass


class OutOfDomain(DomainError):
    pass


class OutOfRange(DomainError):
    pass


class DimensionMismatch(DomainError):
    pass


class NotUniformlyConvex(DomainError):
    """Raised for p in {1, inf}, where the l_p sphere has flat pieces."""


class NotUnitFunctional(DomainError):
    pass


class ZeroPolynomial(DomainError):
    pass


class NonPositiveMax(WnlError, ArithmeticError):
    pass


class NoConvergence(WnlError, RuntimeError):
    """An iterative solver failed its tolerance.

    ``result`` carries the best answer found so callers can still inspect it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class VerificationFailure(WnlError, AssertionError):
    """Base for checks that report a violated inequality or guarantee."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InequalityViolated(VerificationFailure):
    pass


class VerificationFailed(VerificationFailure):
    pass


class HypothesisViolated(DomainError):
    pass


class GuaranteeFailed(VerificationFailure):
    pass


class MonitorViolation(VerificationFailure):
    pass
