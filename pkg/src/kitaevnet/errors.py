"""Exception hierarchy shared by all modules."""


class KitaevNetError(Exception):
    """Base class for all package errors."""


class CapacityError(KitaevNetError, ValueError):
    """Requested Hilbert space exceeds the configured maximum size."""


class DomainError(KitaevNetError, ValueError):
    """Parameters outside the domain where a closed form is real."""


class UnsupportedBoundaryError(KitaevNetError, ValueError):
    pass


class SymmetryError(KitaevNetError, ValueError):
    """Operator does not commute with the parity it is projected on."""


class InvalidStateError(KitaevNetError, ValueError):
    pass


class ConvergenceError(KitaevNetError, RuntimeError):
    """Iterative eigensolver stopped before reaching tolerance.

    Attributes
    ----------
    residual : float
        Norm of ``H x - E x`` for the last Ritz pair.
    """

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual
