"""Exception types shared across the toolkit."""


class CVQKDError(Exception):
    """Base class for all toolkit errors."""


class DomainError(CVQKDError, ValueError):
    """An input parameter violates its documented domain."""


class NonPhysicalMatrix(CVQKDError, ValueError):
    """A covariance matrix violates the Heisenberg uncertainty bound."""


class DegenerateMeasurement(CVQKDError, ValueError):
    """A homodyne conditioning would invert a (near-)zero quadrature variance."""


class EmptyRegion(CVQKDError, ValueError):
    """No physically allowed correlation exists at the requested output variance."""


class NoPositiveRate(CVQKDError, RuntimeError):
    """The key rate is non-positive even for a noiseless channel."""
