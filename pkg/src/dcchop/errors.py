class DcchopError(Exception):
    """Base class for all errors raised by this package."""


class InvalidConfig(DcchopError, ValueError):
    pass


class GenerationFailed(DcchopError, RuntimeError):
    pass


class DimensionMismatch(DcchopError, ValueError):
    pass


class NoReachableAnchor(DcchopError, ValueError):
    pass


class DegenerateGeometry(DcchopError, ArithmeticError):
    pass


class EmptyFront(DcchopError, ValueError):
    pass


class EmptyInput(DcchopError, ValueError):
    pass


class InsufficientSamples(DcchopError, ValueError):
    pass


class MissingCells(DcchopError, KeyError):
    pass
