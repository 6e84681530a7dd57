"""Exception hierarchy shared by every module.

Each class carries the process exit code the CLI maps it to.
"""


class SignedFlowError(Exception):
    exit_code = 1


class GraphError(SignedFlowError, ValueError):
    """Malformed graph, gauge, permutation or file content."""

    exit_code = 2


class DimensionError(SignedFlowError, ValueError):
    exit_code = 2


class UnbalancedGraphError(SignedFlowError):
    """An operation that needs structural balance got an unbalanced graph."""

    exit_code = 3


class NumericalError(SignedFlowError):
    """Eigensolver / SVD failure or an out-of-tolerance numerical result."""

    exit_code = 4


class DivergenceError(SignedFlowError):
    """Integration left the overflow guard; ``trajectory`` holds what was computed."""

    exit_code = 5

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class UnsupportedNonlinearityError(SignedFlowError, ValueError):
    """The requested certificate does not cover this nonlinearity or flow."""

    exit_code = 2
