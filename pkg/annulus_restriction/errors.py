class RestrictionError(Exception):
    """Base class for every error raised by annulus_restriction."""


class DomainError(RestrictionError, ValueError):
    pass


class SlitTipSingularity(DomainError):
    pass


class NonConvergent(RestrictionError, ArithmeticError):
    pass


class ExpansionDomain(RestrictionError, ArithmeticError):
    pass


class StepBudgetExceeded(RestrictionError, RuntimeError):
    pass


class InsufficientAcceptance(RestrictionError, RuntimeError):
    pass
