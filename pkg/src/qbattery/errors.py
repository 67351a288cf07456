"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: validation failures exit 1,
propagator non-convergence exits 3, everything else exits 2.
"""


class QBatteryError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QBatteryError, ValueError):
    """A parameter, config value, or precondition is invalid."""


class CutoffError(ValidationError):
    """Photon cutoff too small to hold the initial Fock states."""


class DimensionMismatchError(ValidationError):
    """Operator and state (or two states) live on different bases."""


class ConvergenceError(QBatteryError, RuntimeError):
    """Krylov step could not meet the requested tolerance."""


class DegenerateTraceError(QBatteryError, ValueError):
    """A trace is flat, so maxima are undefined."""
