"""Exception types shared across the engine.

All engine errors derive from :class:`GbpError` so callers can catch the
whole family; the CLI maps any of them to exit code 1.
"""


class GbpError(Exception):
    """Base class for all engine errors."""


class SingularPrecision(GbpError):
    """Precision matrix not invertible at working tolerance (unconstrained direction)."""


class SingularCovariance(GbpError):
    """Covariance matrix not invertible at working tolerance."""


class SingularBlock(GbpError):
    """The block being eliminated during marginalization is not invertible."""


class DimensionMismatch(GbpError):
    """Operands have incompatible dimensions."""


class UnknownNode(GbpError):
    """Node id not present in the graph."""


class NotAdjacent(GbpError):
    """The named factor and variable are not connected."""


class InvalidBeta(GbpError):
    """Damping parameter outside (0, 1]."""


class MissingAssignment(GbpError):
    """An energy evaluation was not given a value for every variable."""


class EvaluationFailure(GbpError):
    """Measurement function undefined at the requested point."""


class NonFiniteJacobian(GbpError):
    """Jacobian evaluation produced NaN or infinity."""


class CoincidentPoints(EvaluationFailure):
    """Range-bearing evaluated with robot and landmark at the same point."""


class EmptyGraph(GbpError):
    """Schedule stepped on a graph with no variables."""


class InvalidSpec(GbpError):
    """Problem specification fails validation."""


class NotAGrid(GbpError):
    """Coarsening requested on a graph that is not a grid."""


class ZeroDiagonal(GbpError):
    """Jacobi iteration on a system with a zero diagonal entry."""


class UnknownSession(GbpError):
    """Session id not found (or missing) in a session command."""


class InvalidOp(GbpError):
    """Session command with an unknown or malformed op."""


class DisconnectedGraphWarning(UserWarning):
    """A simulated landmark is never observed and ends up unconstrained."""
