"""Exception types raised by the library."""

import numpy as np


class DimensionError(ValueError):
    """Array shapes do not agree."""


class SizeCapError(ValueError):
    """A problem size exceeds a configured enumeration or memory cap."""

    def __init__(self, cap_name, value, cap):
        self.cap_name = cap_name
        self.value = value
        self.cap = cap
        super().__init__(f"{cap_name}: {value} exceeds cap {cap}")


class IterationLimitError(RuntimeError):
    """The LP solver ran out of iterations before reaching a verdict."""


class SolverError(RuntimeError):
    """An LP subproblem failed inside a precoder; carries the node identity."""

    def __init__(self, message, node=None):
        self.node = node
        if node is not None:
            message = f"{message} (node prefix={node})"
        super().__init__(message)


class RankDeficientError(np.linalg.LinAlgError):
    """The channel has no right pseudo-inverse (rank < K*L)."""
