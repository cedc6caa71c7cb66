"""Exception types shared across the package."""


class IfraError(Exception):
    """Base class for all package errors."""


class DataError(IfraError, ValueError):
    """Input data or configuration violates a documented contract."""


class NumericError(IfraError, ArithmeticError):
    """A numerical routine could not produce a defined result."""


class TableTooLargeError(NumericError):
    """Exact enumeration would exceed the configured table budget."""
