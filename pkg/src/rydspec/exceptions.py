"""Exception hierarchy.

Domain errors (bad quantum numbers, unsupported transitions, malformed
inputs) derive from :class:`DomainError` and map to CLI exit code 2.
Numerical failures derive from :class:`NumericalError` and map to exit
code 3.
"""


class RydspecError(Exception):
    """Base class for all package errors."""


class DomainError(RydspecError, ValueError):
    """Input outside the domain an operation accepts."""


class UnsupportedTransitionError(DomainError):
    """Requested J <-> J' pair violates the dipole selection rule |dJ| <= 1."""


class UnsupportedInFastPathError(DomainError):
    """Configuration needs the full Lindblad solver (e.g. detuned microwaves)."""


class NumericalError(RydspecError, ArithmeticError):
    """A numerical routine failed to produce a trustworthy result."""


class EigensolverError(NumericalError):
    pass


class DegenerateSteadyStateError(NumericalError):
    """Liouvillian kernel is not one-dimensional."""


class FitError(NumericalError):
    """Least-squares fit did not converge."""

    def __init__(self, message, residual_rms=None):
        super().__init__(message)
        self.residual_rms = residual_rms


class SinglePeakError(FitError):
    """Fewer than two peaks were detectable in a trace."""
