"""Exception hierarchy.

Domain errors (bad physical or combinatorial arguments) derive from both
``MqdephaseError`` and ``ValueError`` so callers may catch either.
"""


class MqdephaseError(Exception):
    """Base class for all package errors."""


class DomainError(MqdephaseError, ValueError):
    """An argument is outside the operation's domain of validity."""


class DegenerateGeometryError(DomainError):
    """Two spins occupy the same position, making couplings singular."""


class DegenerateCouplingsError(DomainError):
    """Every coupling is zero; correlation scalars are undefined."""


class UndefinedCorrelationError(DomainError):
    """A reference spin has no nonzero coupling, so its p is undefined."""


class UnderdeterminedDataError(DomainError):
    """Rate data cannot constrain the fit (e.g. a single coherence order)."""


class InsufficientSamplesError(DomainError):
    """Too few early-time samples to fit the quadratic onset."""


class ResourceLimitError(MqdephaseError):
    """Requested cluster size exceeds the configured enumeration cap."""


class NoCrossingError(MqdephaseError):
    """The signal never reaches 1/e; no decay rate exists."""


class NonMonotoneError(MqdephaseError):
    """The signal increased while bracketing the 1/e crossing."""
