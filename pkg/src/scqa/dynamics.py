"""
Self-consistent quadratic propagation of Gaussian states.

The Hamiltonian symbol is replaced along the trajectory by the quadratic form
with coefficients ``B = <grad^2 H>`` and ``C = <grad H> - B <q>``, evaluated in
the current Gaussian state, and the integral of motion ``(lam, delta)`` obeys

    d lam / dt = lam J B,        lam(0) = E
    d delta / dt = lam J C,      delta(0) = 0

with ``<q>_t = lam^{-1} (<q>_0 - delta)`` and ``M_t = lam^{-1} M_0 lam^{-T}``.
"""

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import weyl
from .errors import (
    ConservationDrift,
    NoConvergence,
    NonRealHamiltonian,
    OutOfRange,
    SingularCovariance,
    SymplecticDrift,
)
from .phasespace import (
    GaussianState,
    SymplecticPropagator,
    standard_J,
    symplectic_check,
    symplectic_eigenvalues,
    thermal_covariance,
)

logger = logging.getLogger(__name__)

IMAG_TOL = 1e-10
CLOSURES = ("wick", "gwp")


@dataclass(frozen=True)
class ScCoefficients:
    B: np.ndarray
    C: np.ndarray


@dataclass(frozen=True)
class IntegratorOptions:
    """
    Parameters
    ----------
    step : float
        RK4 step; the last step is shortened so the run ends at ``t_end``.
    sample_every : int
        Record one trajectory sample every this many steps.
    symplectic_tol, conservation_tol : float or None
        Abort thresholds; ``None`` switches the check off.
    closure : {"wick", "gwp"}
        ``"gwp"`` truncates the Wick series at zeroth order (Gaussian
        wave-packet dynamics).
    invariant_orders : tuple of int
        Powers ``m`` for which ``tr((M J^T)^m)`` is recorded.
    """

    step: float = 1e-3
    method: str = "rk4"
    sample_every: int = 1
    symplectic_tol: float = 1e-8
    conservation_tol: float = 1e-6
    closure: str = "wick"
    invariant_orders: tuple = (2, 4)

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.method != "rk4":
            raise ValueError(f"unknown integration method {self.method!r}")
        if self.closure not in CLOSURES:
            raise ValueError(f"closure must be one of {CLOSURES}, got {self.closure!r}")
        if int(self.sample_every) < 1:
            raise ValueError("sample_every must be >= 1")
        for name in ("symplectic_tol", "conservation_tol"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive or None")


@dataclass(frozen=True)
class InvariantsRecord:
    detM: float
    L: dict
    Dcoeffs: np.ndarray


def _real_checked(values, what, tol=IMAG_TOL):
    values = np.asarray(values, dtype=complex)
    scale = max(1.0, float(np.abs(values.real).max(initial=0.0)))
    if np.abs(values.imag).max(initial=0.0) > tol * scale:
        raise NonRealHamiltonian(
            f"{what} has imaginary part {np.abs(values.imag).max():.3e}; the Hamiltonian symbol is not real"
        )
    return values.real


def sc_coefficients(H, state, closure="wick"):
    """
    Self-consistent quadratic coefficients ``(B, C)`` of ``H`` in ``state``.

    This is the reference evaluation through ``weyl.wick_expectation``; the
    integrator uses an equivalent batched evaluator.
    """
    if closure not in CLOSURES:
        raise ValueError(f"closure must be one of {CLOSURES}")
    nv = H.nvars
    grad = weyl.gradient(H)
    hess = weyl.hessian(H)
    if closure == "wick":
        ev = lambda A: weyl.wick_expectation(A, state)  # noqa: E731
    else:
        ev = lambda A: complex(A(state.mean))  # noqa: E731
    g = _real_checked([ev(a) for a in grad], "<grad H>")
    B = np.empty((nv, nv))
    raw = {}
    for i in range(nv):
        for j in range(i, nv):
            raw[i, j] = ev(hess[i][j])
    vals = _real_checked(list(raw.values()), "<grad^2 H>")
    for (i, j), v in zip(raw, vals):
        B[i, j] = B[j, i] = v
    return ScCoefficients(B, g - B @ state.mean)


class _CompiledHamiltonian:
    """Energy, ``<grad H>`` and ``<grad^2 H>`` from one Gaussian moment table."""

    def __init__(self, H, closure="wick"):
        if H.is_graded:
            raise ValueError("collapse hbar-graded Hamiltonians with semiclassical_eval first")
        if not H.is_real(IMAG_TOL):
            raise NonRealHamiltonian("Hamiltonian symbol has complex coefficients")
        self.nv = nv = H.nvars
        grad = weyl.gradient(H)
        hess = weyl.hessian(H)
        self.pairs = [(i, j) for i in range(nv) for j in range(i, nv)]
        self.ev = weyl.WickEvaluator([H] + grad + [hess[i][j] for i, j in self.pairs])
        self.closure = closure
        self._zero = np.zeros((nv, nv))
        self._iu = tuple(np.array(self.pairs).T)

    def __call__(self, mean, cov):
        v = self.ev(mean, cov if self.closure == "wick" else self._zero)
        nv = self.nv
        B = np.empty((nv, nv))
        B[self._iu] = v[1 + nv :]
        B.T[self._iu] = v[1 + nv :]
        return v[0], v[1 : 1 + nv], B


class _Rhs:
    def __init__(self, H, state0, closure):
        self.compiled = _CompiledHamiltonian(H, closure)
        self.n = state0.n
        self.J = standard_J(self.n)
        self.mu0 = np.asarray(state0.mean)
        self.M0 = np.asarray(state0.cov)

    def state_arrays(self, lam, delta):
        K = self.J @ lam.T @ self.J.T
        mean = K @ (self.mu0 - delta)
        M = K @ self.M0 @ K.T
        return mean, M

    def __call__(self, lam, delta):
        mean, M = self.state_arrays(lam, delta)
        _, g, B = self.compiled(mean, M)
        C = g - B @ mean
        LJ = lam @ self.J
        return LJ @ B, LJ @ C


def _rk4_step(f, lam, delta, h):
    k1l, k1d = f(lam, delta)
    k2l, k2d = f(lam + 0.5 * h * k1l, delta + 0.5 * h * k1d)
    k3l, k3d = f(lam + 0.5 * h * k2l, delta + 0.5 * h * k2d)
    k4l, k4d = f(lam + h * k3l, delta + h * k3d)
    return (
        lam + h / 6 * (k1l + 2 * k2l + 2 * k3l + k4l),
        delta + h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d),
    )


def _advance(f, lam, delta, dt, step):
    """RK4 over ``dt`` (either sign) in equal sub-steps no longer than ``step``."""
    if dt == 0:
        return lam, delta
    nsub = max(1, math.ceil(abs(dt) / step - 1e-9))
    h = dt / nsub
    for _ in range(nsub):
        lam, delta = _rk4_step(f, lam, delta, h)
    return lam, delta


def propagate(H, state0, t, step=1e-3, closure="wick"):
    """SCQA propagator ``(lam_t, delta_t)`` at a single time (``t`` may be negative)."""
    rhs = _Rhs(H, state0, closure)
    dim = state0.mean.size
    lam, delta = _advance(rhs, np.eye(dim), np.zeros(dim), float(t), step)
    return SymplecticPropagator(lam, delta, float(t))


def scqa_rhs(H, prop, init, closure="wick"):
    """Right-hand side ``(lam J B, lam J C)`` for the propagator ``prop`` started from ``init``."""
    K = prop.inverse
    state = GaussianState(K @ (init.mean - prop.delta), K @ init.cov @ K.T, init.hbar)
    co = sc_coefficients(H, state, closure)
    LJ = np.asarray(prop.lam) @ standard_J(init.n)
    return LJ @ co.B, LJ @ co.C


# ---------------------------------------------------------------------------
# invariants


def universal_invariants(M, orders=(2, 4)):
    """
    Invariants of quadratic evolution for a covariance ``M``.

    ``detM``, ``L[m] = tr((M J^T)^m)`` and the coefficients of
    ``det(M - mu J)`` in ascending powers of ``mu`` (sampled at 2n+1 points
    and interpolated).
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0] // 2
    J = standard_J(n)
    MJ = M @ J.T
    L = {}
    for m in orders:
        L[int(m)] = float(np.trace(np.linalg.matrix_power(MJ, int(m))))
    mus = np.arange(-n, n + 1, dtype=float)
    dets = [np.linalg.det(M - mu * J) for mu in mus]
    V = np.vander(mus, 2 * n + 1, increasing=True)
    D = np.linalg.solve(V, dets)
    return InvariantsRecord(float(np.linalg.det(M)), L, D)


@dataclass(frozen=True)
class Trajectory:
    """
    Sampled SCQA solution.  Array fields share a leading sample axis.

    ``hamiltonian``, ``state0`` and ``options`` are kept so the trajectory can
    be resumed between samples (see ``state_at``).
    """

    t: np.ndarray
    lam: np.ndarray
    delta: np.ndarray
    mean: np.ndarray
    cov: np.ndarray
    energy: np.ndarray
    invariants: tuple
    sym_residual: np.ndarray
    hamiltonian: object = field(repr=False, default=None)
    state0: GaussianState = field(repr=False, default=None)
    options: IntegratorOptions = field(repr=False, default=None)

    def __len__(self):
        return len(self.t)

    def propagator(self, i):
        return SymplecticPropagator(self.lam[i], self.delta[i], float(self.t[i]), tol=None)

    def state(self, i):
        return GaussianState(self.mean[i], self.cov[i], self.state0.hbar)

    def state_at(self, t):
        """Gaussian state at an arbitrary time inside the trajectory window."""
        if not self.t[0] <= t <= self.t[-1]:
            raise OutOfRange(f"t={t} outside [{self.t[0]}, {self.t[-1]}]")
        i = int(np.searchsorted(self.t, t, side="right")) - 1
        i = min(max(i, 0), len(self.t) - 1)
        rhs = _Rhs(self.hamiltonian, self.state0, self.options.closure)
        lam, delta = _advance(rhs, self.lam[i], self.delta[i], t - self.t[i], self.options.step)
        mean, M = rhs.state_arrays(lam, delta)
        return GaussianState(mean, (M + M.T) / 2, self.state0.hbar)

    def csv_header(self):
        d = self.delta.shape[1]
        cols = ["t"]
        cols += [f"lam_{i}_{j}" for i in range(d) for j in range(d)]
        cols += [f"delta_{i}" for i in range(d)]
        cols += [f"mean_{i}" for i in range(d)]
        cols += [f"cov_{i}_{j}" for i in range(d) for j in range(i, d)]
        cols += ["energy", "detM", "L_2", "L_4", "symplectic_residual"]
        return cols

    def csv_rows(self):
        d = self.delta.shape[1]
        iu = np.triu_indices(d)
        for k in range(len(self.t)):
            inv = self.invariants[k]
            L2 = inv.L.get(2, float(np.trace(np.linalg.matrix_power(self.cov[k] @ standard_J(d // 2).T, 2))))
            L4 = inv.L.get(4, float(np.trace(np.linalg.matrix_power(self.cov[k] @ standard_J(d // 2).T, 4))))
            row = [self.t[k], *self.lam[k].ravel(), *self.delta[k], *self.mean[k], *self.cov[k][iu]]
            row += [self.energy[k], inv.detM, L2, L4, self.sym_residual[k]]
            yield row

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.csv_header())
            for row in self.csv_rows():
                w.writerow([format(float(v), ".17g") for v in row])


def _drift(x, x0, floor):
    return float(np.max(np.abs(np.asarray(x) - np.asarray(x0)))) / max(floor, 1e-300)


def _drifts(energy, inv, energy0, inv0):
    """Relative drifts; each family is normalized by its largest initial magnitude."""
    out = {"energy": _drift(energy, energy0, max(abs(energy0), 1e-12))}
    out["detM"] = _drift(inv.detM, inv0.detM, abs(inv0.detM))
    Lscale = max([abs(v) for v in inv0.L.values()] + [1e-300])
    for m in inv0.L:
        out[f"L_{m}"] = _drift(inv.L[m], inv0.L[m], Lscale)
    Dscale = float(np.abs(inv0.Dcoeffs).max())
    for m, (d, d0) in enumerate(zip(inv.Dcoeffs, inv0.Dcoeffs)):
        out[f"D_{m}"] = _drift(d, d0, Dscale)
    return out


def integrate(H, state0, t_end, opts=None):
    """
    Integrate the SCQA equations with fixed-step RK4 from ``lam = E``, ``delta = 0``.

    Raises
    ------
    SymplecticDrift, ConservationDrift
        When a monitored quantity leaves its tolerance; the exception carries
        the offending time.
    """
    opts = opts or IntegratorOptions()
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if H.nvars != state0.mean.size:
        raise ValueError(f"Hamiltonian over {H.nvars} variables, state over {state0.mean.size}")
    rhs = _Rhs(H, state0, opts.closure)
    n = state0.n
    nsteps = max(1, math.ceil(t_end / opts.step - 1e-9))
    h = t_end / nsteps
    lam = np.eye(2 * n)
    delta = np.zeros(2 * n)

    ts, lams, deltas, means, covs, energies, invs, resid = [], [], [], [], [], [], [], []
    inv0 = e0 = None

    def record(k, lam, delta):
        nonlocal inv0, e0
        t = k * h
        mean, M = rhs.state_arrays(lam, delta)
        M = (M + M.T) / 2
        e, _, _ = rhs.compiled(mean, M)
        inv = universal_invariants(M, opts.invariant_orders)
        if inv0 is None:
            inv0, e0 = inv, e
        elif opts.conservation_tol is not None:
            for name, d in _drifts(e, inv, e0, inv0).items():
                if d > opts.conservation_tol:
                    raise ConservationDrift(name, d, opts.conservation_tol, t)
        ts.append(t)
        lams.append(lam.copy())
        deltas.append(delta.copy())
        means.append(mean)
        covs.append(M)
        energies.append(e)
        invs.append(inv)
        resid.append(symplectic_check(lam))

    record(0, lam, delta)
    for k in range(1, nsteps + 1):
        lam, delta = _rk4_step(rhs, lam, delta, h)
        if opts.symplectic_tol is not None:
            res = symplectic_check(lam)
            if res > opts.symplectic_tol:
                raise SymplecticDrift(res, opts.symplectic_tol, k * h)
        if k % opts.sample_every == 0 or k == nsteps:
            record(k, lam, delta)

    return Trajectory(
        t=np.array(ts),
        lam=np.array(lams),
        delta=np.array(deltas),
        mean=np.array(means),
        cov=np.array(covs),
        energy=np.array(energies),
        invariants=tuple(invs),
        sym_residual=np.array(resid),
        hamiltonian=H,
        state0=state0,
        options=opts,
    )


def energy(H, state):
    """Expectation value of a time-independent Hamiltonian symbol."""
    return float(_real_checked([weyl.wick_expectation(H, state)], "<H>")[0])


def conservation_monitor(traj):
    """Maximum relative drifts of energy and the universal invariants, plus the worst symplectic residual."""
    e0, inv0 = traj.energy[0], traj.invariants[0]
    worst = {}
    for e, inv in zip(traj.energy, traj.invariants):
        for k, v in _drifts(e, inv, e0, inv0).items():
            worst[k] = max(worst.get(k, 0.0), float(v))
    worst["symplectic"] = float(np.max(traj.sym_residual))
    return worst


# ---------------------------------------------------------------------------
# stationary states


def _expectations(H, state):
    grad = weyl.gradient(H)
    hess = weyl.hessian(H)
    g = _real_checked([weyl.wick_expectation(a, state) for a in grad], "<grad H>")
    B = _real_checked([[weyl.wick_expectation(h, state) for h in row] for row in hess], "<grad^2 H>")
    return g, B


def stationary_residual(H, state):
    """Scalar stationarity condition ``<grad H>^T J <q> - tr(J <grad^2 H> M)``."""
    g, B = _expectations(H, state)
    J = standard_J(state.n)
    return float(g @ J @ state.mean - np.trace(J @ B @ state.cov))


def stationarity_defect(H, state):
    """
    Largest entry of the instantaneous time derivatives of the mean and covariance,
    ``-J <grad H>`` and ``-(J B M + (J B M)^T)``; zero exactly for SCQA fixed points.
    """
    g, B = _expectations(H, state)
    J = standard_J(state.n)
    X = J @ B @ state.cov
    return float(max(np.abs(J @ g).max(), np.abs(X + X.T).max()))


def stationary_solve(H, M_init, hbar=1.0, mean_init=None, alpha=0.5, tol=1e-10, max_iter=10000, full_output=False):
    """
    Self-consistent stationary Gaussian by damped fixed-point iteration.

    Each iteration evaluates ``B = <grad^2 H>`` and ``<grad H>`` in the current
    state, moves the mean by a Newton step on ``<grad H> = 0`` and mixes the
    covariance towards the stationary covariance of ``q^T B q / 2`` that keeps
    the symplectic spectrum of ``M_init``.

    Raises
    ------
    NoConvergence
        If ``B`` stops being positive definite (no normalizable stationary
        Gaussian) or the iteration does not settle within ``max_iter``.
    """
    M = np.asarray(M_init, dtype=float)
    GaussianState(np.zeros(M.shape[0]), M, hbar)
    if np.linalg.eigvalsh(M).min() <= 0:
        raise ValueError("M_init must be positive definite")
    nus = symplectic_eigenvalues(M)
    mean = np.zeros(M.shape[0]) if mean_init is None else np.asarray(mean_init, dtype=float)
    compiled = _CompiledHamiltonian(H)
    history = []
    for it in range(1, max_iter + 1):
        _, g, B = compiled(mean, M)
        try:
            target = thermal_covariance(B, nus)
            step = np.linalg.solve(B, g)
        except (SingularCovariance, np.linalg.LinAlgError) as exc:
            raise NoConvergence(f"<grad^2 H> is not positive definite at iteration {it}: {exc}") from exc
        new_M = (1 - alpha) * M + alpha * target
        new_mean = mean - alpha * step
        change = float(max(np.abs(new_M - M).max(), np.abs(new_mean - mean).max()))
        history.append(change)
        M, mean = (new_M + new_M.T) / 2, new_mean
        if change < tol:
            break
    else:
        raise NoConvergence(f"no fixed point after {max_iter} iterations (last change {history[-1]:.3e})")
    state = GaussianState(mean, M, hbar)
    res = stationary_residual(H, state)
    defect = stationarity_defect(H, state)
    if abs(res) > 1e-8 or defect > 1e-8:
        raise NoConvergence(f"fixed point reached but residual {res:.3e}, defect {defect:.3e}")
    logger.info("stationary state after %d iterations, residual %.3e", it, res)
    if full_output:
        return state, {"iterations": it, "residual": res, "defect": defect, "history": history}
    return state


# ---------------------------------------------------------------------------


def ehrenfest_residual(A, H, traj, t, h_fd=1e-4):
    """
    Mismatch between a central finite difference of ``<A>_t`` along the
    trajectory and the Gaussian Ehrenfest right-hand side
    ``sigma(<grad A>, <grad H>) - tr(J <grad^2 H> M <grad^2 A>)``.
    """
    if not (traj.t[0] + h_fd <= t <= traj.t[-1] - h_fd):
        raise OutOfRange(f"t={t} with h_fd={h_fd} is not interior to [{traj.t[0]}, {traj.t[-1]}]")
    plus = weyl.wick_expectation(A, traj.state_at(t + h_fd))
    minus = weyl.wick_expectation(A, traj.state_at(t - h_fd))
    lhs = (plus - minus) / (2 * h_fd)
    state = traj.state_at(t)
    J = standard_J(state.n)
    gH, BH = _expectations(H, state)
    gA = np.array([weyl.wick_expectation(a, state) for a in weyl.gradient(A)])
    BA = np.array([[weyl.wick_expectation(h, state) for h in row] for row in weyl.hessian(A)])
    rhs = gH @ J @ gA - np.trace(J @ BH @ state.cov @ BA)
    return float(abs(lhs - rhs))
