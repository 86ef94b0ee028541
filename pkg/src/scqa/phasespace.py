"""
Canonical-vector conventions, symplectic linear algebra and Gaussian states.

All phase-space vectors use the momenta-first ordering
``q = (p_1, ..., p_n, x_1, ..., x_n)`` and every matrix in the package is
stored in that ordering.  With it the canonical commutator reads
``[q_a, q_b] = -i hbar J_ab`` for the block matrix ``J = [[0, I], [-I, 0]]``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, SingularCovariance, SymplecticDrift, UncertaintyViolation

# default tolerance for symplectic drift of propagators
SYMPLECTIC_TOL = 1e-8
# eigenvalues of M + (i hbar/2) J^T may dip this far below zero from roundoff
UNCERTAINTY_TOL = 1e-10


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def standard_J(n):
    """Standard symplectic matrix ``[[0, I], [-I, 0]]`` of size 2n."""
    if int(n) != n or n < 1:
        raise DimensionMismatch(f"number of modes must be a positive integer, got {n!r}")
    n = int(n)
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def n_modes(dim):
    """Number of modes for a phase-space dimension ``dim = 2n``."""
    if dim < 2 or dim % 2:
        raise DimensionMismatch(f"phase-space dimension must be even and >= 2, got {dim}")
    return dim // 2


def symplectic_check(L):
    """Return the max-norm residual ``||L^T J L - J||_inf`` of a square matrix."""
    L = np.asarray(L)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {L.shape}")
    J = standard_J(n_modes(L.shape[0]))
    return float(np.max(np.abs(L.T @ J @ L - J)))


def symplectic_inverse(L, tol=SYMPLECTIC_TOL):
    """
    Inverse of a symplectic matrix through ``J L^T J^T``.

    Parameters
    ----------
    L : array (2n, 2n) or SymplecticPropagator
    tol : float
        Maximum tolerated symplectic residual.  ``None`` disables the check.
    """
    if isinstance(L, SymplecticPropagator):
        L = L.lam
    L = np.asarray(L, dtype=float)
    if tol is not None:
        res = symplectic_check(L)
        if res > tol:
            raise SymplecticDrift(res, tol)
    J = standard_J(n_modes(L.shape[0]))
    return J @ L.T @ J.T


def symplectic_eigenvalues(M):
    """Sorted symplectic eigenvalues of a symmetric positive matrix (Williamson spectrum)."""
    M = np.asarray(M, dtype=float)
    J = standard_J(n_modes(M.shape[0]))
    ev = np.abs(np.linalg.eigvals(J @ M).imag)
    return np.sort(ev)[::2]


def random_symplectic(n, rng, scale=0.5):
    """Random symplectic matrix ``expm(J S)`` with ``S`` symmetric; useful for tests and demos."""
    from scipy.linalg import expm

    A = rng.normal(scale=scale, size=(2 * n, 2 * n))
    return expm(standard_J(n) @ (A + A.T) / 2)


@dataclass(frozen=True)
class GaussianState:
    """
    Gaussian state given by its mean ``<q>`` and symmetric covariance ``M``.

    The covariance is the covariance of the Wigner function, so the vacuum of
    ``H = (p^2 + x^2)/2`` has ``M = hbar/2 * E``.  Construction validates the
    uncertainty relation ``M + (i hbar/2) J^T >= 0``.
    """

    mean: np.ndarray
    cov: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        mean = _frozen(self.mean)
        cov = np.array(self.cov, dtype=float)
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(
                f"mean of length {mean.size} incompatible with covariance shape {cov.shape}"
            )
        n = n_modes(mean.size)
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise ValueError("covariance matrix must be symmetric")
        cov = (cov + cov.T) / 2
        sigma = cov + 0.5j * self.hbar * standard_J(n).T
        lowest = np.linalg.eigvalsh(sigma).min()
        if lowest < -UNCERTAINTY_TOL * max(1.0, np.abs(cov).max()):
            raise UncertaintyViolation(
                f"M + (i hbar/2) J^T has eigenvalue {lowest:.3e} < 0"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", _frozen(cov))
        object.__setattr__(self, "hbar", float(self.hbar))

    @property
    def n(self):
        return self.mean.size // 2

    @property
    def sigma0(self):
        """Complex matrix ``M + (i hbar/2) J^T`` (symmetrically ordered two-point function)."""
        return self.cov + 0.5j * self.hbar * standard_J(self.n).T

    def replace(self, mean=None, cov=None, hbar=None):
        return GaussianState(
            self.mean if mean is None else mean,
            self.cov if cov is None else cov,
            self.hbar if hbar is None else hbar,
        )

    # common families; single-mode helpers take (p, x) ordering for means
    @classmethod
    def vacuum(cls, n=1, hbar=1.0):
        return cls(np.zeros(2 * n), 0.5 * hbar * np.eye(2 * n), hbar)

    @classmethod
    def coherent(cls, mean, hbar=1.0):
        mean = np.asarray(mean, dtype=float)
        return cls(mean, 0.5 * hbar * np.eye(mean.size), hbar)

    @classmethod
    def squeezed(cls, r, mean=(0.0, 0.0), hbar=1.0, phi=0.0):
        """Single-mode squeezed state, ``M = hbar/2 R(phi) diag(e^{2r}, e^{-2r}) R(phi)^T``."""
        c, s = np.cos(phi), np.sin(phi)
        R = np.array([[c, -s], [s, c]])
        M = 0.5 * hbar * R @ np.diag([np.exp(2 * r), np.exp(-2 * r)]) @ R.T
        return cls(np.asarray(mean, dtype=float), M, hbar)

    @classmethod
    def thermal(cls, nu, n=1, mean=None, hbar=1.0):
        """Thermal oscillator state ``M = nu E`` with ``nu >= hbar/2``."""
        mean = np.zeros(2 * n) if mean is None else np.asarray(mean, dtype=float)
        return cls(mean, nu * np.eye(mean.size), hbar)


@dataclass(frozen=True)
class SymplecticPropagator:
    """Integral of motion ``q_t = lam q + delta`` at time ``t``."""

    lam: np.ndarray
    delta: np.ndarray
    t: float = 0.0
    tol: float = field(default=SYMPLECTIC_TOL, compare=False)

    def __post_init__(self):
        lam = _frozen(self.lam)
        delta = _frozen(self.delta)
        if lam.shape != (delta.size, delta.size):
            raise DimensionMismatch(f"lambda {lam.shape} incompatible with delta of size {delta.size}")
        n_modes(delta.size)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "delta", delta)
        if self.tol is not None:
            res = symplectic_check(lam)
            if res > self.tol:
                raise SymplecticDrift(res, self.tol, self.t)
            det = np.linalg.det(lam)
            if abs(det - 1.0) > self.tol:
                raise SymplecticDrift(abs(det - 1.0), self.tol, self.t)

    @classmethod
    def identity(cls, n=1):
        return cls(np.eye(2 * n), np.zeros(2 * n), 0.0)

    @property
    def inverse(self):
        return symplectic_inverse(self.lam, self.tol)


def _check_point(state, z):
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != state.mean.size:
        raise DimensionMismatch(f"point of length {z.shape[-1]} for a {state.mean.size}-dim state")
    return z


def wigner_eval(state, z):
    """
    Gaussian Wigner function of ``state`` at ``z``.

    ``z`` may carry leading batch axes; the last axis is the phase-space index.
    """
    z = _check_point(state, z)
    M = np.asarray(state.cov)
    det = np.linalg.det(2 * np.pi * M)
    if not det > 0:
        raise SingularCovariance(f"det(2 pi M) = {det:.3e} is not positive")
    dz = z - state.mean
    quad = np.einsum("...i,ij,...j->...", dz, np.linalg.inv(M), dz)
    return np.exp(-0.5 * quad) / np.sqrt(det)


def evolve_wigner_point(state0, prop, z):
    """Evolved Wigner function ``W_0(lam z + delta)``."""
    z = _check_point(state0, z)
    return wigner_eval(state0, z @ np.asarray(prop.lam).T + prop.delta)


def mean_evolve(prop, mean0):
    """Mean at time t: ``lam^{-1} (mean0 - delta)``."""
    return prop.inverse @ (np.asarray(mean0, dtype=float) - prop.delta)


def cov_evolve(prop, M0):
    """Covariance at time t: ``lam^{-1} M0 lam^{-T}``."""
    K = prop.inverse
    return K @ np.asarray(M0, dtype=float) @ K.T


def evolve_state(state0, prop):
    return GaussianState(mean_evolve(prop, state0.mean), cov_evolve(prop, state0.cov), state0.hbar)


def heisenberg_q(prop):
    """
    Heisenberg-picture canonical vector ``q_H = lam^{-1} (q - delta)``.

    Returns
    -------
    (matrix, offset) such that ``q_H = matrix @ q + offset``.
    """
    K = prop.inverse
    return K, -K @ prop.delta


def williamson(B):
    """
    Williamson normal form of a symmetric positive-definite matrix.

    Returns ``(S, omega)`` with ``S`` symplectic and
    ``B = S^T diag(omega, omega) S`` in momenta-first ordering.
    """
    from scipy.linalg import schur, sqrtm

    B = np.asarray(B, dtype=float)
    n = n_modes(B.shape[0])
    if np.linalg.eigvalsh((B + B.T) / 2).min() <= 0:
        raise SingularCovariance("Williamson decomposition needs a positive-definite matrix")
    Bh = np.real(sqrtm(B))
    K = Bh @ standard_J(n) @ Bh
    T, O = schur(K, output="real")
    cols_p, cols_x, omega = [], [], []
    i = 0
    while i < 2 * n:
        b = T[i, i + 1]
        u, v = O[:, i], O[:, i + 1]
        if b < 0:
            u, v, b = v, u, -b
        cols_p.append(u)
        cols_x.append(v)
        omega.append(b)
        i += 2
    O = np.column_stack(cols_p + cols_x)
    omega = np.array(omega)
    d = np.sqrt(np.concatenate([omega, omega]))
    S_inv = np.linalg.solve(Bh, O * d)
    return np.linalg.inv(S_inv), omega


def thermal_covariance(B, nu):
    """
    Covariance of the Gaussian stationary under ``H = q^T B q / 2`` whose
    normal modes carry symplectic eigenvalues ``nu`` (matched in ascending
    order of the normal-mode frequencies).
    """
    S, omega = williamson(B)
    nu = np.sort(np.broadcast_to(np.asarray(nu, dtype=float), omega.shape))
    order = np.argsort(omega)
    nus = np.empty_like(omega)
    nus[order] = nu
    S_inv = np.linalg.inv(S)
    return S_inv @ np.diag(np.concatenate([nus, nus])) @ S_inv.T
