"""Exception hierarchy shared by every module of the package."""


class ScqaError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(ScqaError, ValueError):
    pass


class SymplecticDrift(ScqaError):
    """A propagator left the symplectic group by more than the allowed tolerance."""

    def __init__(self, residual, tol, t=None):
        self.residual = residual
        self.tol = tol
        self.t = t
        where = "" if t is None else f" at t={t:.17g}"
        super().__init__(f"symplectic residual {residual:.3e} exceeds {tol:.1e}{where}")


class ConservationDrift(ScqaError):
    """A conserved quantity drifted beyond tolerance during integration."""

    def __init__(self, quantity, drift, tol, t):
        self.quantity = quantity
        self.drift = drift
        self.tol = tol
        self.t = t
        super().__init__(
            f"relative drift of {quantity} is {drift:.3e} > {tol:.1e} at t={t:.17g}"
        )


class SingularCovariance(ScqaError, ValueError):
    pass


class UncertaintyViolation(ScqaError, ValueError):
    pass


class DegreeOverflow(ScqaError, ValueError):
    pass


class NonRealHamiltonian(ScqaError, ValueError):
    pass


class NoConvergence(ScqaError):
    pass


class NotStationary(ScqaError, ValueError):
    pass


class OutOfRange(ScqaError, ValueError):
    pass


class UnsupportedDim(ScqaError, ValueError):
    pass


class UnsupportedCovariance(ScqaError, ValueError):
    pass


class TruncationError(ScqaError):
    pass


class NonHermitian(ScqaError, ValueError):
    pass


class GridMismatch(ScqaError, ValueError):
    pass


class ConfigError(ScqaError, ValueError):
    """Invalid experiment configuration; ``path`` locates the offending field."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
