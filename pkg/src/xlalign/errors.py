"""Exception types shared across the package."""


class DataError(ValueError):
    """Input data is malformed or violates a precondition."""


class NumericError(ArithmeticError):
    """A numeric quantity is undefined or degenerate (zero vector, zero variance)."""
