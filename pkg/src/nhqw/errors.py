"""Exception hierarchy."""


class NHQWError(Exception):
    """Base class for all package errors."""


class ValidationError(NHQWError, ValueError):
    """An input violates a documented precondition."""


class BoundaryError(ValidationError):
    """Amplitude would leave an open lattice during dynamics."""


class NumericalError(NHQWError, ArithmeticError):
    """A numerical routine produced an out-of-domain or unusable result."""


class NumericalDomainError(NumericalError):
    """A computed quantity fell outside its mathematical domain."""


class ConvergenceError(NumericalError):
    """An iterative solver hit its iteration cap.

    Attributes
    ----------
    index : int
        Index of the eigenvalue that failed to converge.
    """

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class BandTrackingError(NumericalError):
    """Band continuation was ambiguous at one or more k-points."""


class UnsupportedReconstruction(NHQWError):
    """The sigma_z / sigma_x measurement pair cannot determine the requested quantity."""


class ConfigError(NHQWError):
    """Scenario configuration is malformed, incomplete or out of range."""
