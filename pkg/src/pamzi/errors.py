"""Exception types shared across the package."""


class PamziError(Exception):
    """Base class for all package errors."""


class OutOfRangeError(PamziError):
    """A parameter violates its allowed range."""

    def __init__(self, field, value, bound):
        self.field = field
        self.value = value
        self.bound = bound
        super().__init__(f"{field}={value!r} violates {bound}")


class SchemeMismatchError(PamziError):
    """Scheme and photon-added number are inconsistent (original requires m=0)."""


class CapTooLargeError(PamziError):
    """Requested series truncation exceeds the configured workload budget."""


class SpecExceedsCapError(PamziError):
    """A moment specification asks for orders beyond the series truncation."""


class ZeroSlopeError(PamziError):
    """The observable's phase slope is numerically zero at this operating point."""


class NoFinitePointError(PamziError):
    """Every point of an optimization grid was singular."""


class NonPositiveFisherError(PamziError):
    """Cramer-Rao bound requested for a non-positive Fisher information."""


class TruncationLossError(PamziError):
    """Discarded Fock-space probability mass exceeds the tolerance."""

    def __init__(self, tail, tol):
        self.tail = tail
        self.tol = tol
        super().__init__(f"truncated probability mass {tail:.3e} exceeds {tol:.3e}")


class SpecExceedsCutoffError(PamziError):
    """A moment specification needs more ladder headroom than the cutoff provides."""


class IllConditionedError(PamziError):
    """Spectral quantities could not be resolved at the working precision."""
