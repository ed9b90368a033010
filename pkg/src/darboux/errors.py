"""Exception hierarchy shared by all modules.

Errors split into two families so the command line front end can map them
to exit codes: configuration problems (bad flags, unsupported combinations)
and domain problems (a valid request that cannot be evaluated at the given
point or parameters).
"""


class DarbouxError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(DarbouxError):
    """Invalid or inconsistent configuration."""


class DomainError(DarbouxError):
    """Valid request that fails on its mathematical domain."""


class ChartSpaceMismatch(ConfigError):
    """Chart is not defined on the requested space."""


class UnsupportedChart(ConfigError):
    """Potential has no expression in the requested chart."""


class NotSeparableHere(ConfigError):
    """Potential does not separate (tractably) in the requested chart."""


class UnknownLevel(ConfigError):
    """Requested level is not part of the spectrum."""


class DomainViolation(DomainError):
    """Point or parameter outside the domain of definition."""


class SingularDenominator(DomainError):
    """Closed-form expression hits a zero denominator."""


class OutOfSupportedRange(DomainError):
    """Special function argument outside the validated range."""


class Overflow(DomainError):
    """Result not representable as a finite double."""


class PoleOfM(DomainError):
    """Whittaker M evaluated at a pole in its second index."""


class NoRootsInWindow(DomainError):
    """Root scan found no sign change in the search window."""


class NonConvergence(DomainError):
    """Iterative solver failed to reach the requested tolerance."""


class EvanescentRegime(DomainError):
    """Wave function argument leaves the real axis."""


class TruncationTooSmall(DomainError):
    """Eigenfunction mass at the truncation boundary is too large."""
