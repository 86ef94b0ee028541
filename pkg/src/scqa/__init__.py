"""
Self-consistent quadratic approximation (SCQA) for phase-space quantum dynamics.

Modules
-------
phasespace
    Symplectic conventions and Gaussian states.
weyl
    Polynomial Weyl symbols, Moyal products and Gaussian (Wick) expectations.
dynamics
    SCQA propagation, conserved quantities and stationary states.
response
    Nonlinear response functions and polarization.
oracle
    Exact truncated-Fock reference for single-mode checks.
"""

__version__ = "0.1.0"

from .phasespace import GaussianState, SymplecticPropagator  # noqa: E402
from .weyl import PolySymbol  # noqa: E402

__all__ = ["GaussianState", "SymplecticPropagator", "PolySymbol", "__version__"]
