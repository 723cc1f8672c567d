"""Exception hierarchy shared by every module of the package."""


class OscPotError(Exception):
    """Base class for computational errors raised by oscpot."""


class DomainError(OscPotError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class PoleError(DomainError):
    """A Gamma function (or a prefactor built from one) hits a pole."""


class SingularRingError(DomainError):
    """The symbol was requested on (or too close to) the unit sphere |xi| = 1."""


class ConvergenceError(OscPotError):
    """A series, quadrature or extrapolation failed to converge."""


class ExtrapolationError(ConvergenceError):
    """Successive Richardson extrapolants diverge instead of settling."""


class ResolutionError(OscPotError):
    """A grid is too coarse for the oscillation or frequency it must carry."""


class FitError(OscPotError):
    """A least-squares slope fit has a residual above its configured cap."""


class TruncationError(OscPotError):
    """The kernel mass dropped by a finite truncation radius exceeds the budget."""


class NearZeroDivisionError(OscPotError, ZeroDivisionError):
    """A denominator fell below the configured threshold."""
