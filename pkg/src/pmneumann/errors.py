"""Exception types shared across the package."""


class PmError(Exception):
    """Base class for package errors."""


class ConfigError(PmError):
    """Invalid experiment configuration; message names the offending field."""


class GraphError(PmError):
    """Malformed monotone graph (non-monotone table, bad parameters, domain)."""


class GridError(PmError):
    """Grid mismatch or malformed grid."""


class FieldError(PmError):
    """Gridded field violates a structural invariant."""


class ConvergenceError(PmError):
    """Iterative solve exhausted its budget; carries the last residual."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class EvennessError(PmError):
    """A field expected to be even about x=0 is not, beyond tolerance."""


class SchemeFault(PmError):
    """A scheme invariant (positivity, monotone K, ...) was violated."""
