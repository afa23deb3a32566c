"""Exception types shared across the package."""


class DtnError(Exception):
    """Base class for all package errors."""


class PoleError(DtnError, ValueError):
    """Raised when the spectral parameter sits on a Dirichlet eigenvalue."""

    def __init__(self, pole: float, message: str | None = None):
        self.pole = float(pole)
        super().__init__(message or f"lambda coincides with the Dirichlet eigenvalue {pole!r}")


class CapabilityError(DtnError, NotImplementedError):
    """Raised when an operation does not support the requested domain."""


class GeometryError(DtnError, ValueError):
    """Raised for irregular or self-intersecting boundary curves."""


class AccuracyError(DtnError, ValueError):
    """Raised when a requested evaluation cannot be done accurately."""


class BesselDomainError(DtnError, ValueError):
    """Raised for Bessel arguments outside the supported range."""


class BesselOverflowError(DtnError, OverflowError):
    """Raised when an unscaled Bessel value does not fit in a double."""
