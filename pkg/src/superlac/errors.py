"""Exception types shared across the package."""


class UndefinedIndexError(ValueError):
    """A frequency or coefficient sequence was queried outside its domain."""


class ValidationError(ValueError):
    """An input object violates a documented precondition or invariant."""


class NumericalContractError(RuntimeError):
    """A certified-accuracy contract cannot be met (precision or tolerance)."""
