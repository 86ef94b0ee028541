"""
Nonlinear response functions of Gaussian equilibrium states.

The N-th order response function is the nested commutator
``S = tr(rho_0 [[..[V(t_1), V(t_2)]..], V(t_{N+1})])``.  It is expanded into
``2^N`` ordered products (``permutation_terms``), each of which is an
(N+1)-point function evaluated in closed form for Gaussian states: the
Heisenberg interaction at waiting time ``t_j`` is ``V(lam_j^{-1}(q - delta_j))``
and the ordered product is contracted with the two-time blocks
``Sigma_jk = lam_j^{-1} Sigma_0 lam_k^{-T}``, ``Sigma_0 = M_0 + (i hbar/2) J^T``.
"""

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.linalg import expm

from . import dynamics, weyl
from .errors import DimensionMismatch, GridMismatch, NotStationary
from .phasespace import GaussianState, SymplecticPropagator, standard_J, symplectic_inverse

logger = logging.getLogger(__name__)

STATIONARY_TOL = 1e-8


@dataclass(frozen=True)
class PermutationTerm:
    """Ordered product ``V(t_sigma(1)) ... V(t_sigma(N+1))`` entering with ``sign``; ``sigma`` is 1-based."""

    sigma: tuple
    sign: int
    k: int


def permutation_terms(N):
    """
    Signed ordered products of the nested commutator of ``N + 1`` operators.

    The permutations satisfy ``sigma(1) > ... > sigma(k) = 1 < ... < sigma(N+1)``
    and enter with sign ``(-1)^(k-1)``; there are ``C(N, k-1)`` of them for
    each ``k`` and ``2^N`` in total.
    """
    N = int(N)
    if N < 1:
        raise ValueError(f"response order must be >= 1, got {N}")
    rest = range(2, N + 2)
    out = []
    for k in range(1, N + 2):
        terms = []
        for before in combinations(rest, k - 1):
            after = [i for i in rest if i not in before]
            terms.append(tuple(sorted(before, reverse=True)) + (1,) + tuple(after))
        for sigma in sorted(terms):
            out.append(PermutationTerm(sigma, (-1) ** (k - 1), k))
    return out


@dataclass(frozen=True)
class ResponseRequest:
    """
    Parameters
    ----------
    order : int
        Response order N.
    times : sequence of float
        Waiting times ``t_1 >= ... >= t_{N+1}``.
    H : PolySymbol
        Static Hamiltonian symbol.
    state : GaussianState
        Equilibrium state; must be stationary under ``H`` unless ``H`` is quadratic.
    V : PolySymbol or sequence of PolySymbol
        Interaction symbol, or one symbol per waiting time.
    exp_a : sequence of vectors, optional
        Exponential interactions ``exp(a_j^T q)``; replaces ``V``.
    mode : {"frozen", "integrate"}
        Waiting-time propagators from the frozen stationary generator or from
        the SCQA integrator.
    """

    order: int
    times: tuple
    H: object
    state: GaussianState
    V: object = None
    exp_a: object = None
    mode: str = "frozen"
    step: float = 1e-3

    def __post_init__(self):
        N = int(self.order)
        if N < 1:
            raise ValueError(f"response order must be >= 1, got {self.order}")
        object.__setattr__(self, "order", N)
        times = tuple(float(t) for t in self.times)
        if len(times) != N + 1:
            raise DimensionMismatch(f"order {N} needs {N + 1} waiting times, got {len(times)}")
        if any(a < b for a, b in zip(times, times[1:])):
            raise ValueError(f"waiting times must be non-increasing, got {times}")
        object.__setattr__(self, "times", times)
        if self.mode not in ("frozen", "integrate"):
            raise ValueError(f"unknown propagator mode {self.mode!r}")
        if (self.V is None) == (self.exp_a is None):
            raise ValueError("give exactly one of V (polynomial) or exp_a (exponential interactions)")
        dim = self.state.mean.size
        if self.H.nvars != dim:
            raise DimensionMismatch(f"Hamiltonian over {self.H.nvars} variables, state over {dim}")
        if self.V is not None:
            Vs = list(self.V) if isinstance(self.V, (list, tuple)) else [self.V] * (N + 1)
            if len(Vs) != N + 1:
                raise DimensionMismatch(f"need {N + 1} interaction symbols, got {len(Vs)}")
            for v in Vs:
                if v.nvars != dim:
                    raise DimensionMismatch("interaction symbol dimension differs from the state")
                if not v.is_real(1e-12):
                    raise ValueError("interaction symbols must have real coefficients")
            object.__setattr__(self, "V", tuple(Vs))
        else:
            a = np.array(self.exp_a, dtype=float)
            if a.shape != (N + 1, dim):
                raise DimensionMismatch(f"exp_a must have shape {(N + 1, dim)}, got {a.shape}")
            a.setflags(write=False)
            object.__setattr__(self, "exp_a", a)

    @property
    def hbar(self):
        return self.state.hbar

    @property
    def exponential(self):
        return self.exp_a is not None

    def with_times(self, times):
        return ResponseRequest(self.order, times, self.H, self.state, self.V, self.exp_a, self.mode, self.step)

    def symbols_at(self, hbar):
        """Interaction symbols with any hbar grading collapsed."""
        return tuple(weyl.semiclassical_eval(v, hbar) for v in self.V)


# ---------------------------------------------------------------------------
# waiting-time propagators


@dataclass(frozen=True)
class WaitingTimePropagators:
    times: tuple
    props: tuple

    def __len__(self):
        return len(self.props)

    def __getitem__(self, j):
        return self.props[j]


def check_stationary(H, state, tol=STATIONARY_TOL):
    """
    Raise ``NotStationary`` unless ``state`` is a fixed point of the SCQA flow.

    Quadratic Hamiltonians are exempt: their frozen generator is exact for any state.
    """
    if H.degree <= 2:
        return
    res = dynamics.stationary_residual(H, state)
    defect = dynamics.stationarity_defect(H, state)
    if abs(res) > tol or defect > tol:
        raise NotStationary(f"equilibrium state has residual {res:.3e} and defect {defect:.3e} (tol {tol:.0e})")


class _FrozenGenerator:
    """``lam_t = exp(t J B)`` and ``delta_t`` from one augmented matrix exponential."""

    def __init__(self, H, state):
        co = dynamics.sc_coefficients(weyl.semiclassical_eval(H, state.hbar), state)
        J = standard_J(state.n)
        dim = state.mean.size
        aug = np.zeros((dim + 1, dim + 1))
        aug[:dim, :dim] = J @ co.B
        aug[:dim, dim] = J @ co.C
        self.aug = aug
        self.dim = dim

    def __call__(self, t):
        E = expm(t * self.aug)
        return SymplecticPropagator(E[: self.dim, : self.dim], E[: self.dim, self.dim], t)


def waiting_propagators(H, eq_state, times, mode="frozen", cross_check=False, step=1e-3, check=True):
    """
    Propagators ``(lam_j, delta_j)`` for every waiting time.

    ``mode="frozen"`` uses the stationary generator; ``cross_check`` compares it
    with the SCQA integrator and raises ``NotStationary`` on a mismatch above 1e-8.
    """
    if check:
        check_stationary(H, eq_state)
    times = tuple(float(t) for t in times)
    Hc = weyl.semiclassical_eval(H, eq_state.hbar)
    if mode == "frozen":
        gen = _FrozenGenerator(Hc, eq_state)
        props = tuple(gen(t) for t in times)
    elif mode == "integrate":
        props = tuple(dynamics.propagate(Hc, eq_state, t, step) for t in times)
    else:
        raise ValueError(f"unknown propagator mode {mode!r}")
    if cross_check:
        other = "integrate" if mode == "frozen" else "frozen"
        alt = waiting_propagators(Hc, eq_state, times, other, False, step, check=False)
        for p, q in zip(props, alt.props):
            err = max(np.abs(p.lam - q.lam).max(), np.abs(p.delta - q.delta).max())
            if err > 1e-8:
                raise NotStationary(f"frozen and integrated propagators differ by {err:.3e} at t={p.t}")
    return WaitingTimePropagators(times, props)


@dataclass(frozen=True)
class SigmaBlocks:
    """``blocks[j, k] = lam_j^{-1} Sigma_0 lam_k^{-T}`` together with the inverses ``lam_j^{-1}``."""

    blocks: np.ndarray
    sigma0: np.ndarray
    inverses: np.ndarray = field(repr=False)


def sigma_blocks(props, M0, hbar):
    M0 = np.asarray(M0, dtype=float)
    n = M0.shape[0] // 2
    sigma0 = M0 + 0.5j * hbar * standard_J(n).T
    K = np.array([symplectic_inverse(p.lam, p.tol) for p in props])
    blocks = np.einsum("jab,bc,kdc->jkad", K, sigma0, K)
    return SigmaBlocks(blocks, sigma0, K)


def _time_means(req, props, blocks):
    mu0 = np.asarray(req.state.mean)
    return np.array([K @ (mu0 - p.delta) for K, p in zip(blocks.inverses, props)])


# ---------------------------------------------------------------------------
# evaluators


def _embed(terms, slot, nslots, width):
    out = {}
    for k, v in terms.items():
        key = [0] * (nslots * width)
        key[slot * width : (slot + 1) * width] = k
        out[tuple(key)] = v
    return out


def _ordered_product_value(symbols, means, blocks, order):
    """
    Gaussian value of the ordered product ``prod_j A_j`` where ``A_j`` is the
    symbol ``symbols[order[j]]`` expanded at ``means[order[j]]``.
    """
    m = len(order)
    width = means.shape[1]
    terms = {(0,) * (m * width): 1.0}
    for pos, j in enumerate(order):
        shifted = weyl._shift_terms(symbols[j]._terms, means[j])
        terms = weyl._mul_terms(terms, _embed(shifted, pos, m, width))
        if not terms:
            return 0j
    G = np.zeros((m * width, m * width), dtype=complex)
    for a, ja in enumerate(order):
        sa = slice(a * width, (a + 1) * width)
        G[sa, sa] = 0.5 * blocks.blocks[ja, ja]
        for b in range(a + 1, m):
            jb = order[b]
            G[sa, b * width : (b + 1) * width] = blocks.blocks[ja, jb]
    return complex(weyl.gaussian_contract(terms, G))


def gaussian_response_R(perm, req, props, blocks):
    """Ordered (N+1)-point function of the permutation ``perm`` for a polynomial interaction."""
    if req.exponential:
        return exponential_response(req.exp_a, req, props, perm)
    symbols = req.symbols_at(req.hbar)
    means = _time_means(req, props, blocks)
    order = [s - 1 for s in perm.sigma]
    return _ordered_product_value(symbols, means, blocks, order)


def _exp_parts(a_list, req, props, perm):
    a = np.asarray(a_list, dtype=float)
    K = np.array([symplectic_inverse(p.lam, p.tol) for p in props])
    order = range(len(props)) if perm is None else [s - 1 for s in perm.sigma]
    b = np.array([K[j].T @ a[j] for j in order])
    shift = -sum(a[j] @ K[j] @ props[j].delta for j in range(len(props)))
    J = standard_J(req.state.n)
    pair = 0.0
    for j in range(len(b)):
        for k in range(j + 1, len(b)):
            pair += b[j] @ J @ b[k]
    phi = shift - 0.5j * req.hbar * pair
    return phi, b.sum(axis=0)


def exponential_phase(a_list, req, props, perm=None):
    """Phase ``phi`` relating the exponential-interaction response to the characteristic function."""
    return complex(_exp_parts(a_list, req, props, perm)[0])


def char_samples(req, props, a_list):
    """Quantum-optics characteristic function of the initial state at ``i J^T sum_j lam_j^{-T} a_j``."""
    _, bsum = _exp_parts(a_list, req, props, None)
    lam = 1j * standard_J(req.state.n).T @ bsum
    return weyl.optics_char_function(req.state, lam)


def exponential_response(a_list, req, props, perm=None):
    """
    Ordered product of ``exp(a_j^T q(t_j))`` in closed form.

    ``perm`` selects the operator order (identity order when omitted).  The
    result is ``exp(phi) * chi_0(sum_j lam_j^{-T} a_j)``.
    """
    phi, bsum = _exp_parts(a_list, req, props, perm)
    return complex(np.exp(phi) * weyl.char_function(req.state, bsum))


def response_S(req, props=None, blocks=None):
    """Nested-commutator response function as the signed sum over ordered products."""
    if props is None:
        props = waiting_propagators(req.H, req.state, req.times, req.mode, step=req.step)
    if blocks is None:
        blocks = sigma_blocks(props, req.state.cov, req.hbar)
    total = 0j
    for term in permutation_terms(req.order):
        total += term.sign * gaussian_response_R(term, req, props, blocks)
    return total


class ResponseEvaluator:
    """
    Repeated evaluation of ``response_S`` for one (H, state, V) at many time tuples.

    Propagators and per-time data are cached by waiting time, which is what the
    polarization quadrature needs.
    """

    def __init__(self, req):
        self.req = req
        check_stationary(req.H, req.state)
        self._gen = _FrozenGenerator(weyl.semiclassical_eval(req.H, req.hbar), req.state) if req.mode == "frozen" else None
        self._cache = {}
        self._terms = permutation_terms(req.order)
        self._symbols = None if req.exponential else req.symbols_at(req.hbar)

    def _prop(self, t):
        p = self._cache.get(t)
        if p is None:
            if self._gen is not None:
                p = self._gen(t)
            else:
                p = dynamics.propagate(weyl.semiclassical_eval(self.req.H, self.req.hbar), self.req.state, t, self.req.step)
            self._cache[t] = p
        return p

    def __call__(self, times):
        req = self.req.with_times(times)
        props = WaitingTimePropagators(req.times, tuple(self._prop(t) for t in req.times))
        blocks = sigma_blocks(props, req.state.cov, req.hbar)
        return response_S(req, props, blocks)


# ---------------------------------------------------------------------------
# polarization


@dataclass(frozen=True)
class FieldProfile:
    """
    Classical field either sampled on a uniform grid ``t0 + k dt`` or given as
    impulsive pulses ``[(time, area), ...]``.
    """

    t0: float = 0.0
    dt: float = None
    values: np.ndarray = None
    pulses: tuple = None

    def __post_init__(self):
        if (self.values is None) == (self.pulses is None):
            raise ValueError("a field profile is either sampled values or a pulse list")
        if self.values is not None:
            if self.dt is None or not self.dt > 0:
                raise GridMismatch("sampled field needs a positive grid step")
            v = np.array(self.values, dtype=float)
            v.setflags(write=False)
            object.__setattr__(self, "values", v)
        else:
            pulses = tuple(sorted(((float(t), float(a)) for t, a in self.pulses), key=lambda p: -p[0]))
            if any(t < self.t0 for t, _ in pulses):
                raise GridMismatch("pulse times must not precede t0")
            object.__setattr__(self, "pulses", pulses)

    @classmethod
    def sampled(cls, t0, dt, values):
        return cls(t0=float(t0), dt=float(dt), values=values)

    @classmethod
    def from_function(cls, f, t0, t1, dt):
        k = int(round((t1 - t0) / dt))
        if abs(t0 + k * dt - t1) > 1e-9 * max(1.0, abs(t1)):
            raise GridMismatch(f"[{t0}, {t1}] is not a whole number of steps {dt}")
        t = t0 + dt * np.arange(k + 1)
        return cls.sampled(t0, dt, f(t))

    @classmethod
    def impulsive(cls, pulses, t0=0.0):
        return cls(t0=float(t0), pulses=tuple(pulses))

    @property
    def is_impulsive(self):
        return self.pulses is not None

    @property
    def grid(self):
        return self.t0 + self.dt * np.arange(len(self.values))

    def index_of(self, t):
        k = int(round((t - self.t0) / self.dt))
        if not 0 <= k < len(self.values) or abs(self.t0 + k * self.dt - t) > 1e-9 * max(1.0, abs(t)):
            raise GridMismatch(f"observation time {t} is not a point of the field grid")
        return k


def _trapezoid_weights(upper, dt):
    if upper == 0:
        return np.zeros(1)
    w = np.full(upper + 1, dt)
    w[0] = w[-1] = dt / 2
    return w


def polarization(req, field, t_grid, evaluator=None):
    """
    N-th order polarization ``P(t) = i^N int E(t_2)..E(t_{N+1}) S(t, t_2, .., t_{N+1})``
    over the ordered simplex ``t >= t_2 >= ... >= t_{N+1} >= t0``.

    Sampled fields use nested composite trapezoid sums on the field grid;
    impulsive fields place one interaction on each of N distinct pulses.
    ``req`` supplies order, H, state and interaction; its times are ignored.
    """
    ev = evaluator or ResponseEvaluator(req)
    N = req.order
    phase = 1j**N
    out = []
    for t in np.asarray(t_grid, dtype=float):
        if field.is_impulsive:
            acc = 0j
            active = [p for p in field.pulses if p[0] <= t]
            for chosen in combinations(active, N):
                area = math.prod(a for _, a in chosen)
                acc += area * ev((t,) + tuple(tp for tp, _ in chosen))
        else:
            if t < field.t0:
                raise GridMismatch(f"observation time {t} precedes t0={field.t0}")
            m = field.index_of(t)
            grid = field.grid
            E = field.values

            def nested(level, upper, times):
                if level == N:
                    return ev((t,) + times)
                w = _trapezoid_weights(upper, field.dt)
                acc = 0j
                for k in range(upper + 1):
                    if w[k] and E[k]:
                        acc += w[k] * E[k] * nested(level + 1, k, times + (grid[k],))
                return acc

            acc = nested(0, m, ())
        value = phase * acc
        if abs(value.imag) > 1e-8 * max(1.0, abs(value.real)):
            logger.warning("polarization at t=%g has imaginary part %.3e", t, value.imag)
        out.append(value.real)
    return np.array(out)


# ---------------------------------------------------------------------------
# classical limit


@dataclass(frozen=True)
class ClassicalLimitReport:
    hbars: np.ndarray
    values: np.ndarray
    power: float
    limit: complex
    verdict: str


def classical_limit_probe(req, hbar_seq, tol=1e-3):
    """
    Response function along a decreasing hbar sequence with the covariance held fixed.

    The leading power ``p`` is the least-squares slope of ``log|S|`` against
    ``log hbar``; ``limit`` extrapolates ``S / hbar^p`` linearly to hbar = 0.
    The verdict is ``"bounded"`` when ``|S|`` does not grow as hbar decreases
    (``p >= -tol``) and ``"divergent"`` otherwise.
    """
    hbars = np.asarray(hbar_seq, dtype=float)
    if hbars.ndim != 1 or len(hbars) < 2 or np.any(hbars <= 0) or np.any(np.diff(hbars) >= 0):
        raise ValueError("hbar_seq must be a strictly decreasing sequence of positive numbers")
    values = []
    for h in hbars:
        state = GaussianState(req.state.mean, req.state.cov, h)
        sub = ResponseRequest(req.order, req.times, req.H, state, req.V, req.exp_a, req.mode, req.step)
        values.append(response_S(sub))
    values = np.array(values)
    mags = np.abs(values)
    if np.all(mags < 1e-300):
        return ClassicalLimitReport(hbars, values, math.inf, 0j, "bounded")
    if np.any(mags < 1e-300):
        # mixed zeros: no power law; judge by the magnitudes alone
        verdict = "bounded" if mags[-1] <= mags.max() else "divergent"
        return ClassicalLimitReport(hbars, values, math.nan, complex(values[-1]), verdict)
    power = float(np.polyfit(np.log(hbars), np.log(mags), 1)[0])
    p = round(power) if abs(power - round(power)) < 1e-2 else power
    scaled = values / hbars**p
    coef_re = np.polyfit(hbars, scaled.real, 1)
    coef_im = np.polyfit(hbars, scaled.imag, 1)
    limit = complex(coef_re[1], coef_im[1])
    verdict = "bounded" if power >= -tol else "divergent"
    return ClassicalLimitReport(hbars, values, power, limit, verdict)
