"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input object violates its documented invariants."""


class ContractError(ValueError):
    """Raised when a function is called outside its documented contract."""


class NumericalError(RuntimeError):
    """Raised when a numerical procedure fails to converge or degenerates."""
