"""Exception hierarchy.

Two families matter to callers: :class:`DataError` (bad inputs, files,
dimensions) and :class:`NumericalError` (the math cannot proceed). The CLI
maps them to exit codes 1 and 2.
"""


class SkewBLError(Exception):
    """Base class for all package errors."""


class DataError(SkewBLError, ValueError):
    """Malformed or inconsistent input data."""


class DimensionError(DataError):
    """Array shapes do not agree, or a matrix lacks the required rank."""


class NumericalError(SkewBLError, ArithmeticError):
    """A computation failed for numerical reasons."""


class ParameterError(NumericalError):
    """Distribution or model parameters violate their invariants."""


class UnsupportedParameterError(ParameterError):
    """Parameters are valid but outside what an operation supports."""


class SingularSkewError(NumericalError):
    """Skew loading so extreme that some |delta_j| reaches 1."""


class DecompositionError(NumericalError):
    """Spherical covariance of a Simaan decomposition is not positive definite."""


class DegenerateConstraintsError(NumericalError):
    """Constraint vectors of a Lagrange system are (nearly) linearly dependent."""
