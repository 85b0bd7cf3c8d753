"""Exception types shared across the package."""


class HarnackLabError(Exception):
    """Base class for all package errors."""


class DomainError(HarnackLabError, ValueError):
    """An evaluation was requested outside a function's mathematical domain."""


class ArgumentError(HarnackLabError, ValueError):
    """An argument violates a documented contract (shape, sign, range)."""


class PreconditionError(HarnackLabError, RuntimeError):
    """A stated precondition of an operation does not hold.

    Distinct from a failing verdict: the check could not legitimately run.
    """


class StencilError(HarnackLabError, RuntimeError):
    """A stencil would read values outside the masked grid region."""


class DivergenceError(HarnackLabError, RuntimeError):
    """The fixed-point iteration diverged even after damping reduction."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


class GeometryError(HarnackLabError, ValueError):
    """A covering or connectivity construction failed on the given geometry."""


class ConfigError(HarnackLabError, ValueError):
    """Experiment configuration is malformed or incomplete."""
