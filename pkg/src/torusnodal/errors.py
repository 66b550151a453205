"""Exception types shared across the package."""


class TorusNodalError(Exception):
    """Base class for all package errors."""


class PreconditionError(TorusNodalError, ValueError):
    """An operation was called outside its domain."""


class CapacityError(TorusNodalError):
    """Input exceeds the configured exact-arithmetic or factorization budget."""


class SingularityError(TorusNodalError, ArithmeticError):
    """A geometric quantity is undefined because the gradient (nearly) vanishes."""


class ConvergenceError(TorusNodalError, RuntimeError):
    """An iterative solver failed to converge."""
