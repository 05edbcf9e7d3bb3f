"""Exception types raised across the package."""


class GraphError(ValueError):
    """Base class for invalid graph input or failed graph operations."""


class LoopError(GraphError):
    """A loop was given where loops are not allowed."""


class HasLoops(LoopError):
    pass


class Disconnected(GraphError):
    pass


class IsolatedVertex(GraphError):
    pass


class SingleVertex(GraphError):
    pass


class NonSymmetric(ValueError):
    pass


class NoLeaves(GraphError):
    pass


class BadParameter(ValueError):
    pass


class BadRange(GraphError):
    pass


class WouldDisconnect(GraphError):
    pass


class OutOfRange(GraphError):
    pass


class BadSubset(GraphError):
    pass


class DegreeTooLow(GraphError):
    pass


class ScanIncomplete(RuntimeError):
    """The eigenvalue scan could not account for every eigenvalue below k_max.

    ``interval`` holds the wavenumber range where the count disagreed.
    """

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class NotAnEigenvalue(ValueError):
    pass


class NotAnEigenfunction(ValueError):
    pass


class ZeroFunction(ValueError):
    pass


class NonConvergence(RuntimeError):
    pass


class MissingInput(ValueError):
    pass
