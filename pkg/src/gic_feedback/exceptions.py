"""Exception types raised by the library."""


class DomainError(ValueError):
    """An argument lies outside the domain where the operation is defined."""


class DegenerateChannelError(DomainError):
    """Raised for a = 0 where only the degraded-channel formula applies."""


class InfeasibleError(DomainError):
    """The requested correlation cannot be realised by the scheme."""


class SolverError(RuntimeError):
    """A root finder could not bracket or converge."""


class ScheduleError(RuntimeError):
    """A coefficient schedule is malformed or does not reproduce its moments."""
