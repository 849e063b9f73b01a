"""Exception types shared across the package."""


class HypertreeError(Exception):
    """Base class for all errors raised by :mod:`hypertrees`."""


class InvalidInput(HypertreeError, ValueError):
    """A face, complex or parameter violates an operation's precondition."""


class InvalidDimension(InvalidInput):
    """A cochain has a dimension the requested map is not defined on."""


class UndefinedWeight(HypertreeError, ZeroDivisionError):
    """Weights are requested on a complex with no top faces."""


class CapacityError(HypertreeError):
    """An exhaustive computation would exceed a configured cap."""

    def __init__(self, what: str, size, cap):
        super().__init__(f"{what}: size {size} exceeds cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap


class NumericalFailure(HypertreeError, ArithmeticError):
    """A floating point kernel is not a positive contraction within tolerance."""
