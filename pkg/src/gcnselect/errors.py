"""Exception types shared across the package."""


class DataError(ValueError):
    """Malformed or inconsistent input data (bad files, bad indices)."""


class NumericalError(ArithmeticError):
    """Non-finite values or failed numerical checks."""


class SpectrumCapError(ValueError):
    """Dense eigensolve requested for a graph above the configured size cap."""
