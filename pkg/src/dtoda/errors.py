"""Exception hierarchy shared by all modules."""


class DTodaError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(DTodaError, ValueError):
    """A potential, config or data record violates its invariants."""


class SeriesError(DTodaError, ValueError):
    """Invalid truncated-series operation (center mismatch, domain, window)."""


class WindowError(SeriesError):
    """Truncation window too small for the requested coefficient."""


class FrameError(DTodaError):
    """Critical frame invariant violated (root collision, root at a pole)."""


class ConvergenceError(DTodaError):
    """Newton iteration failed to reach its tolerance."""


class DegeneracyError(DTodaError):
    """Singular Jacobian; the non-degeneracy condition is violated."""


class ResidualError(DTodaError):
    """An identity that must hold exactly left a residual beyond tolerance."""
