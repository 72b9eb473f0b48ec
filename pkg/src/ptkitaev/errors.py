"""Exception hierarchy shared by every module."""


class PtKitaevError(Exception):
    """Base class for all package errors."""


class ParameterError(PtKitaevError, ValueError):
    """Invalid physical parameters, shapes, or non-finite input."""


class SolverError(PtKitaevError, RuntimeError):
    """Eigensolver failed to converge or violated its residual contract.

    Attributes
    ----------
    state : dict
        Whatever partially converged data the solver had (Schur factor,
        number of deflated eigenvalues, residual, offending ``gamma``...).
    """

    def __init__(self, message, **state):
        super().__init__(message)
        self.state = state


class ConsistencyError(PtKitaevError, RuntimeError):
    """A symmetry or normalization assumption was found violated."""
