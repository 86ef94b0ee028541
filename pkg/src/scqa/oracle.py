"""
Brute-force single-mode reference on a truncated Fock basis.

Weyl quantization, Gaussian state preparation, exact unitary evolution,
expectation values and literal nested-commutator response functions.  Every
routine works with dense d x d matrices and is meant for d of order 100.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import NonHermitian, TruncationError, UnsupportedCovariance, UnsupportedDim
from .phasespace import GaussianState, symplectic_eigenvalues

logger = logging.getLogger(__name__)

TAIL_TOL = 1e-10
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class FockOperator:
    matrix: np.ndarray
    hbar: float = 1.0

    @property
    def dim(self):
        return self.matrix.shape[0]

    def hermiticity_defect(self, interior=True):
        A = self.matrix
        if interior:
            k = interior_size(self.dim)
            A = A[:k, :k]
        return float(np.abs(A - A.conj().T).max(initial=0.0))

    def __matmul__(self, other):
        return FockOperator(self.matrix @ other.matrix, self.hbar)

    def __add__(self, other):
        return FockOperator(self.matrix + other.matrix, self.hbar)

    def __sub__(self, other):
        return FockOperator(self.matrix - other.matrix, self.hbar)


@dataclass(frozen=True)
class FockState:
    rho: np.ndarray

    @property
    def dim(self):
        return self.rho.shape[0]

    def check(self, tol=1e-10):
        rho = self.rho
        if np.abs(rho - rho.conj().T).max() > tol:
            raise NonHermitian("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > tol:
            raise ValueError(f"density matrix has trace {np.trace(rho).real:.12g}")
        if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -tol:
            raise ValueError("density matrix is not positive semidefinite")
        return self


def interior_size(d):
    """Basis states kept in interior-block comparisons: drop the top ceil(d/4)."""
    return d - -(-d // 4)


def ladder(d):
    """Annihilation operator on ``d`` Fock states."""
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)


def quadratures(d, hbar=1.0):
    """Matrices of ``p`` and ``x`` with ``x = sqrt(hbar/2)(a + a^+)``, ``p = i sqrt(hbar/2)(a^+ - a)``."""
    a = ladder(d)
    s = np.sqrt(hbar / 2)
    x = s * (a + a.T)
    p = 1j * s * (a.T - a)
    return p.astype(complex), x.astype(complex)


def weyl_quantize(A, d, hbar=1.0):
    """
    Weyl-ordered operator of a single-mode polynomial symbol.

    Monomials are symmetrized by ``W(z m) = (Z W(m) + W(m) Z) / 2``.  The
    recursion runs in a basis padded by the symbol degree so that the returned
    d x d block is exact.
    """
    if A.n != 1:
        raise UnsupportedDim(f"the Fock oracle is single-mode, got a symbol over {A.n} modes")
    if A.is_graded:
        from .weyl import semiclassical_eval

        A = semiclassical_eval(A, hbar)
    deg = A.degree
    D = d + deg + 1
    P, X = quadratures(D, hbar)
    cache = {(0, 0): np.eye(D, dtype=complex)}

    def W(a, b):
        if (a, b) not in cache:
            if a:
                prev, Z = W(a - 1, b), P
            else:
                prev, Z = W(a, b - 1), X
            cache[a, b] = 0.5 * (Z @ prev + prev @ Z)
        return cache[a, b]

    out = np.zeros((D, D), dtype=complex)
    for (a, b), c in A.terms.items():
        out += c * W(a, b)
    return FockOperator(out[:d, :d], hbar)


def _thermal_rho(nbar, D):
    if nbar == 0:
        rho = np.zeros((D, D))
        rho[0, 0] = 1.0
        return rho
    q = nbar / (nbar + 1)
    w = (1 - q) * q ** np.arange(D)
    return np.diag(w)


def gaussian_to_fock(state, d, pad=None):
    """
    Density matrix of a single-mode Gaussian state.

    The state is built as ``D(alpha) R(theta) S(r) rho_th S^+ R^+ D^+`` in a padded
    basis (displacement ``alpha = (x + i p)/sqrt(2 hbar)``); probability beyond
    the first d levels must stay below 1e-10.
    """
    if state.n != 1:
        raise UnsupportedDim(f"the Fock oracle is single-mode, got {state.n} modes")
    hbar = state.hbar
    M = np.asarray(state.cov)
    nu = float(symplectic_eigenvalues(M)[0])
    nbar = max(nu / hbar - 0.5, 0.0)
    # M = nu * R diag(e^{2r}, e^{-2r}) R^T  in (p, x) ordering
    evals, evecs = np.linalg.eigh(M / nu)
    if evals.min() <= 0:
        raise UnsupportedCovariance("covariance is not positive definite")
    r = 0.25 * np.log(evals[1] / evals[0])
    v = evecs[:, 1]
    theta = float(np.arctan2(v[1], v[0])) if r > 1e-14 else 0.0
    D = pad or max(2 * d, d + 40)
    a = ladder(D)
    n_op = a.T @ a
    rho = _thermal_rho(nbar, D).astype(complex)
    if r > 1e-14:
        # x-squeezing for r > 0: exp(r/2 (a^2 - a^+2))
        S = expm(0.5 * r * (a @ a - a.T @ a.T))
        rho = S @ rho @ S.conj().T
    if theta:
        R = np.diag(np.exp(-1j * theta * np.diag(n_op)))
        rho = R @ rho @ R.conj().T
    p0, x0 = state.mean
    alpha = (x0 + 1j * p0) / np.sqrt(2 * hbar)
    if alpha:
        Dop = expm(alpha * a.T - np.conj(alpha) * a)
        rho = Dop @ rho @ Dop.conj().T
    tail = float(np.real(np.trace(rho) - np.trace(rho[:d, :d])))
    if tail > TAIL_TOL:
        raise TruncationError(f"Gaussian state leaves probability {tail:.3e} beyond {d} Fock levels")
    if abs(np.trace(rho) - 1) > 1e-8:
        raise TruncationError("padded construction lost normalization; increase the padding")
    out = rho[:d, :d]
    out = out / np.trace(out)
    return FockState((out + out.conj().T) / 2)


def unitary(Hop, t):
    """``exp(-i H t / hbar)`` by Hermitian eigendecomposition."""
    Hm = Hop.matrix
    defect = float(np.abs(Hm - Hm.conj().T).max())
    if defect > HERMITIAN_TOL * max(1.0, np.abs(Hm).max()):
        raise NonHermitian(f"Hamiltonian matrix has anti-Hermitian part {defect:.3e}")
    w, U = np.linalg.eigh((Hm + Hm.conj().T) / 2)
    return (U * np.exp(-1j * w * t / Hop.hbar)) @ U.conj().T


def oracle_evolve(Hop, rho, t):
    U = unitary(Hop, t)
    return FockState(U @ rho.rho @ U.conj().T)


def oracle_expect(Aop, rho):
    return complex(np.trace(rho.rho @ Aop.matrix))


def heisenberg(Hop, Aop, t):
    """``U^+(t) A U(t)``."""
    U = unitary(Hop, t)
    return FockOperator(U.conj().T @ Aop.matrix @ U, Aop.hbar)


def oracle_correlation(Hop, rho0, Vops, times):
    """Ordered multi-time product ``tr(rho_0 V_1(t_1) V_2(t_2) ...)``."""
    prod = rho0.rho
    for V, t in zip(Vops, times):
        prod = prod @ heisenberg(Hop, V, t).matrix
    return complex(np.trace(prod))


def oracle_response_S(Hop, rho0, Vop, times):
    """Literal nested commutator ``tr(rho_0 [[..[V(t_1), V(t_2)]..], V(t_{N+1})])``."""
    Vs = Vop if isinstance(Vop, (list, tuple)) else [Vop] * len(times)
    C = heisenberg(Hop, Vs[0], times[0]).matrix
    for V, t in zip(Vs[1:], times[1:]):
        Vt = heisenberg(Hop, V, t).matrix
        C = C @ Vt - Vt @ C
    return complex(np.trace(rho0.rho @ C))


def oracle_response_converged(H, state, V, times, d=40, tol=1e-8, max_dim=320):
    """
    ``oracle_response_S`` built from symbols, doubling d until two successive
    values agree to ``tol``.

    Raises
    ------
    TruncationError
        If no such pair is found up to ``max_dim``.
    """
    Vs = V if isinstance(V, (list, tuple)) else [V] * len(times)
    prev = None
    while d <= max_dim:
        try:
            Hop = weyl_quantize(H, d, state.hbar)
            rho = gaussian_to_fock(state, d)
            val = oracle_response_S(Hop, rho, [weyl_quantize(v, d, state.hbar) for v in Vs], times)
        except TruncationError:
            d *= 2
            continue
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        prev = val
        d *= 2
    raise TruncationError(f"oracle response did not converge to {tol:.0e} up to d={max_dim}")


@dataclass(frozen=True)
class TruncationReport:
    dims: tuple
    values: tuple
    differences: tuple
    passed: bool


def truncation_study(builder, d_seq, tol=1e-8):
    """
    Evaluate ``builder(d)`` for increasing ``d`` and report successive differences.

    The study passes when the last successive difference is below ``tol``
    relative to the last value.
    """
    dims = tuple(int(d) for d in d_seq)
    if any(b <= a for a, b in zip(dims, dims[1:])):
        raise ValueError("d_seq must be strictly increasing")
    values = tuple(np.asarray(builder(d)) for d in dims)
    diffs = tuple(float(np.max(np.abs(b - a))) for a, b in zip(values, values[1:]))
    scale = max(1.0, float(np.max(np.abs(values[-1])))) if values else 1.0
    passed = bool(diffs) and diffs[-1] <= tol * scale
    return TruncationReport(dims, values, diffs, passed)


__all__ = [
    "FockOperator",
    "FockState",
    "GaussianState",
    "weyl_quantize",
    "gaussian_to_fock",
    "oracle_evolve",
    "oracle_expect",
    "oracle_response_S",
    "oracle_response_converged",
    "oracle_correlation",
    "truncation_study",
    "unitary",
    "heisenberg",
    "quadratures",
    "interior_size",
]
