"""Exception types shared across the package."""

from __future__ import annotations


class GoursatKitError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(GoursatKitError, ValueError):
    """A scalar argument is outside its admissible range."""


class GridMismatchError(GoursatKitError, ValueError):
    """Two objects that must share a grid do not."""


class IncompleteJetError(GoursatKitError, ValueError):
    """A derivative family is missing one or more of its 15 entries."""


class InvalidCoefficientError(GoursatKitError, ValueError):
    """A coefficient sample is non-finite."""


class SchemaError(GoursatKitError, ValueError):
    """A configuration or data document violates its schema."""


class ConvergenceError(GoursatKitError, RuntimeError):
    """An iterative solve did not reach the requested tolerance.

    Carries the sup-norm defect per iteration so callers can report what
    actually happened.
    """

    def __init__(self, message: str, residual_history=()):
        super().__init__(message)
        self.residual_history = tuple(float(r) for r in residual_history)


class SingularNodeError(GoursatKitError, RuntimeError):
    """The marching sweep hit a node with a near-singular diagonal."""

    def __init__(self, message: str, node):
        super().__init__(message)
        self.node = tuple(node)
