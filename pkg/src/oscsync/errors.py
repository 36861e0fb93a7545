"""Exception types shared across the package."""


class OscsyncError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(OscsyncError):
    """Fock truncation or operator dimension is unusable."""


class UnsupportedTopologyError(OscsyncError):
    """Requested coupling layout is not available (dimer only)."""


class InvalidRateError(OscsyncError):
    """A dissipation rate is negative."""


class TruncationInsufficientError(OscsyncError):
    """Too much population sits in the top Fock levels for the result to be trusted."""


class InvalidCouplingError(OscsyncError):
    """Coupling operator fails its Hermiticity check."""


class PositivityLossError(OscsyncError):
    """Integrator produced a state with a significantly negative eigenvalue."""

    def __init__(self, message, t=None, min_eig=None):
        super().__init__(message)
        self.t = t
        self.min_eig = min_eig


class InvalidStateError(OscsyncError):
    """Matrix is not an acceptable density matrix for the requested operation."""


class NoSolutionError(OscsyncError):
    """Root solve has no solution in the admissible domain."""


class UnphysicalStateError(OscsyncError):
    """Gaussian covariance violates the uncertainty bound."""


class DegenerateDistributionError(OscsyncError):
    """Covariance matrix is singular where a finite entropy is required."""


class UndefinedMeasureError(OscsyncError):
    """Synchronization measure is undefined (vanishing total radius)."""


class BlowUpError(OscsyncError):
    """Stochastic integration produced a non-finite ensemble member."""

    def __init__(self, message, t=None, member=None):
        super().__init__(message)
        self.t = t
        self.member = member


class ConfigError(OscsyncError):
    """Configuration file could not be parsed or is missing required keys."""
