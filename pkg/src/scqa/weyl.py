"""
Polynomial Weyl-symbol algebra.

Symbols are sparse maps from multi-indices (exponent tuples over the 2n
phase-space variables, momenta first) to complex coefficients.  An optional
hbar grading stores semiclassical corrections ``A = A_c + sum_k hbar^k/k! a_k``.

The expectation value of a symbol in a Gaussian state is computed by applying
the terminating differential operator ``exp(1/2 grad^T M grad)`` to the symbol
Taylor-expanded around the mean.
"""

import ast
import math
from functools import lru_cache
from itertools import product as iproduct

import numpy as np

from .errors import DegreeOverflow, DimensionMismatch
from .phasespace import GaussianState, standard_J

MAX_DEGREE = 16

# ---------------------------------------------------------------------------
# raw term-dict helpers; work for any number of variables


def _clean(terms):
    return {k: v for k, v in terms.items() if v != 0}


def _add_into(dst, src, scale=1.0):
    for k, v in src.items():
        dst[k] = dst.get(k, 0) + scale * v
    return dst


def _mul_terms(a, b):
    out = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = tuple(i + j for i, j in zip(ka, kb))
            out[k] = out.get(k, 0) + va * vb
    return _clean(out)


def _deriv_terms(terms, i, order=1):
    out = {}
    for k, v in terms.items():
        e = k[i]
        if e < order:
            continue
        kk = list(k)
        kk[i] = e - order
        out[tuple(kk)] = out.get(tuple(kk), 0) + v * math.perm(e, order)
    return out


def _deriv_multi(terms, alpha):
    out = terms
    for i, a in enumerate(alpha):
        if a:
            out = _deriv_terms(out, i, a)
            if not out:
                break
    return out


def _degree(terms):
    return max((sum(k) for k in terms), default=0)


def _eval_terms(terms, z):
    z = np.asarray(z)
    acc = 0
    for k, v in terms.items():
        mono = v
        for zi, e in zip(np.moveaxis(z, -1, 0), k):
            if e:
                mono = mono * zi**e
        acc = acc + mono
    return acc


def _shift_terms(terms, point):
    """Re-expand ``A(point + d)`` as a polynomial in ``d``."""
    point = np.asarray(point)
    out = {}
    for k, v in terms.items():
        # expand prod_i (point_i + d_i)^{k_i} binomially
        factors = []
        for ci, e in zip(point, k):
            factors.append([(j, math.comb(e, j) * ci ** (e - j)) for j in range(e + 1)])
        for combo in iproduct(*factors):
            coeff = v
            for _, c in combo:
                coeff = coeff * c
            if coeff == 0:
                continue
            kk = tuple(j for j, _ in combo)
            out[kk] = out.get(kk, 0) + coeff
    return _clean(out)


def _apply_quadratic(terms, G):
    """Apply ``sum_ab G_ab d_a d_b`` (only the symmetric part of G matters)."""
    G = np.asarray(G)
    G = (G + G.T) / 2
    nv = G.shape[0]
    pairs = [(a, b, G[a, b] * (1 if a == b else 2)) for a in range(nv) for b in range(a, nv) if G[a, b] != 0]
    out = {}
    for k, v in terms.items():
        for a, b, g in pairs:
            ea, eb = k[a], k[b]
            if a == b:
                if ea < 2:
                    continue
                c = ea * (ea - 1)
                kk = list(k)
                kk[a] -= 2
            else:
                if ea < 1 or eb < 1:
                    continue
                c = ea * eb
                kk = list(k)
                kk[a] -= 1
                kk[b] -= 1
            kk = tuple(kk)
            out[kk] = out.get(kk, 0) + g * c * v
    return out


def gaussian_contract(terms, G):
    """
    Evaluate ``exp(sum_ab G_ab d_a d_b) A`` at the origin.

    The series terminates after ``deg(A)/2`` applications because every
    application lowers the degree by two.
    """
    zero = None
    acc = 0
    cur = terms
    k = 0
    while cur:
        if zero is None:
            zero = (0,) * len(next(iter(cur)))
        acc = acc + cur.get(zero, 0)
        k += 1
        cur = _apply_quadratic(cur, G)
        cur = {kk: v / k for kk, v in cur.items()}
    return acc


# ---------------------------------------------------------------------------


class PolySymbol:
    """
    Complex polynomial Weyl symbol over 2n phase-space variables.

    Parameters
    ----------
    n : int
        Number of modes; the symbol depends on ``(p_1..p_n, x_1..x_n)``.
    terms : dict, optional
        Map from exponent tuples of length 2n to coefficients.
    grades : dict, optional
        Map ``k >= 1`` to term dicts holding the coefficient of ``hbar^k/k!``.
    max_degree : int
        Products exceeding this total degree raise ``DegreeOverflow``.

    Examples
    --------
    >>> H = PolySymbol.parse("0.5*p**2 + 0.5*x**2 + 0.1*x**4")
    >>> H.degree
    4
    """

    __slots__ = ("n", "_terms", "_grades", "max_degree")

    def __init__(self, n, terms=None, grades=None, max_degree=MAX_DEGREE):
        if int(n) != n or n < 1:
            raise DimensionMismatch(f"number of modes must be a positive integer, got {n!r}")
        self.n = int(n)
        self.max_degree = max_degree
        self._terms = self._validated(terms or {})
        self._grades = {}
        for k, t in (grades or {}).items():
            if int(k) != k or k < 0:
                raise ValueError(f"hbar grade must be a non-negative integer, got {k!r}")
            if k == 0:
                self._terms = _clean(_add_into(dict(self._terms), self._validated(t)))
                continue
            t = self._validated(t)
            if t:
                self._grades[int(k)] = t

    def _validated(self, terms):
        out = {}
        for k, v in terms.items():
            k = tuple(int(e) for e in k)
            if len(k) != 2 * self.n:
                raise DimensionMismatch(f"multi-index {k} has length {len(k)}, expected {2 * self.n}")
            if min(k, default=0) < 0:
                raise ValueError(f"negative exponent in {k}")
            v = complex(v)
            if not np.isfinite(v):
                raise ValueError(f"non-finite coefficient for {k}")
            if v != 0:
                out[k] = out.get(k, 0) + v
        out = _clean(out)
        if self.max_degree is not None and _degree(out) > self.max_degree:
            raise DegreeOverflow(f"degree {_degree(out)} exceeds cap {self.max_degree}")
        return out

    @classmethod
    def _raw(cls, n, terms, grades=None, max_degree=MAX_DEGREE):
        obj = cls.__new__(cls)
        obj.n = n
        obj.max_degree = max_degree
        obj._terms = _clean(terms)
        if max_degree is not None and _degree(obj._terms) > max_degree:
            raise DegreeOverflow(f"degree {_degree(obj._terms)} exceeds cap {max_degree}")
        obj._grades = {k: _clean(t) for k, t in (grades or {}).items() if _clean(t)}
        return obj

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, c, n=1):
        return cls(n, {(0,) * (2 * n): c})

    @classmethod
    def variable(cls, index, n=1):
        e = [0] * (2 * n)
        e[index] = 1
        return cls(n, {tuple(e): 1.0})

    @classmethod
    def p(cls, mode=0, n=1):
        return cls.variable(mode, n)

    @classmethod
    def x(cls, mode=0, n=1):
        return cls.variable(n + mode, n)

    @classmethod
    def monomial(cls, exponents, coeff=1.0):
        exponents = tuple(exponents)
        if len(exponents) % 2:
            raise DimensionMismatch("exponent tuple must have even length")
        return cls(len(exponents) // 2, {exponents: coeff})

    @classmethod
    def parse(cls, text, n=1):
        """
        Parse an arithmetic expression in ``p``, ``x`` (single mode) or
        ``p1..pn``, ``x1..xn``.  ``^`` is accepted as power, ``j`` or ``I`` as the
        imaginary unit, and ``hbar`` marks a first-grade semiclassical term.
        """
        return _SymbolParser(n).parse(text)

    # -- views --------------------------------------------------------------
    @property
    def terms(self):
        return dict(self._terms)

    @property
    def grades(self):
        return {k: dict(v) for k, v in self._grades.items()}

    @property
    def is_graded(self):
        return bool(self._grades)

    @property
    def nvars(self):
        return 2 * self.n

    @property
    def degree(self):
        return max([_degree(self._terms)] + [_degree(t) for t in self._grades.values()])

    def coefficient(self, exponents):
        return self._terms.get(tuple(exponents), 0.0)

    def is_real(self, tol=0.0):
        return all(abs(v.imag) <= tol for v in self._terms.values()) and all(
            abs(v.imag) <= tol for t in self._grades.values() for v in t.values()
        )

    def __call__(self, z):
        """Evaluate the classical (grade-0) symbol at ``z`` (last axis = variables)."""
        z = np.asarray(z)
        if z.shape[-1] != self.nvars:
            raise DimensionMismatch(f"point has {z.shape[-1]} components, expected {self.nvars}")
        return _eval_terms(self._terms, z) if self._terms else 0.0 * np.sum(z, axis=-1)

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, PolySymbol):
            if other.n != self.n:
                raise DimensionMismatch(f"symbols over {self.n} and {other.n} modes")
            return other
        if np.isscalar(other):
            return PolySymbol.constant(other, self.n)
        return NotImplemented

    def _map(self, fn):
        return PolySymbol._raw(self.n, fn(self._terms), {k: fn(t) for k, t in self._grades.items()}, self.max_degree)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        grades = {k: dict(t) for k, t in self._grades.items()}
        for k, t in other._grades.items():
            grades[k] = _add_into(grades.get(k, {}), t)
        return PolySymbol._raw(self.n, _add_into(dict(self._terms), other._terms), grades, self.max_degree)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + other * -1

    def __rsub__(self, other):
        return (-1) * self + other

    def __mul__(self, other):
        if np.isscalar(other):
            c = complex(other)
            return self._map(lambda t: {k: v * c for k, v in t.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a = {0: self._terms, **self._grades}
        b = {0: other._terms, **other._grades}
        out = {}
        for ka, ta in a.items():
            for kb, tb in b.items():
                # (hbar^ka/ka!)(hbar^kb/kb!) = C(ka+kb, ka) hbar^m/m!
                m = ka + kb
                out[m] = _add_into(out.get(m, {}), _mul_terms(ta, tb), math.comb(m, ka))
        base = out.pop(0, {})
        return PolySymbol._raw(self.n, base, out, self.max_degree)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not np.isscalar(other):
            return NotImplemented
        return self * (1.0 / other)

    def __pow__(self, k):
        if int(k) != k or k < 0:
            raise ValueError("only non-negative integer powers of symbols are supported")
        out = PolySymbol.constant(1.0, self.n)
        for _ in range(int(k)):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, PolySymbol):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms and self._grades == other._grades

    def __hash__(self):
        return hash((self.n, frozenset(self._terms.items())))

    def allclose(self, other, atol=1e-12):
        """Coefficient-wise comparison of the full graded symbols."""
        a = {0: self._terms, **self._grades}
        b = {0: other._terms, **other._grades}
        for g in set(a) | set(b):
            ta, tb = a.get(g, {}), b.get(g, {})
            for k in set(ta) | set(tb):
                if abs(ta.get(k, 0) - tb.get(k, 0)) > atol:
                    return False
        return True

    def real(self):
        return self._map(lambda t: {k: complex(v.real) for k, v in t.items()})

    def conj(self):
        return self._map(lambda t: {k: v.conjugate() for k, v in t.items()})

    def __repr__(self):
        if not self._terms and not self._grades:
            return "PolySymbol(0)"
        body = _format_terms(self._terms, self.n)
        for k, t in sorted(self._grades.items()):
            body += f" + hbar^{k}/{k}! * ({_format_terms(t, self.n)})"
        return f"PolySymbol({body})"

    # -- serialization ------------------------------------------------------
    def to_records(self):
        """Canonical list of ``{exponents, re, im, hbar_grade}`` records."""
        recs = []
        for g, t in sorted({0: self._terms, **self._grades}.items()):
            for k in sorted(t, key=lambda e: (sum(e), e)):
                v = t[k]
                recs.append({"exponents": list(k), "re": float(v.real), "im": float(v.imag), "hbar_grade": g})
        return recs

    @classmethod
    def from_records(cls, records, n=None):
        if not records:
            if n is None:
                raise ValueError("cannot infer the number of modes from an empty record list")
            return cls(n)
        if n is None:
            n = len(records[0]["exponents"]) // 2
        grades = {}
        for r in records:
            g = int(r.get("hbar_grade", 0))
            k = tuple(r["exponents"])
            c = complex(r.get("re", 0.0), r.get("im", 0.0))
            grades.setdefault(g, {})
            grades[g][k] = grades[g].get(k, 0) + c
        base = grades.pop(0, {})
        return cls(n, base, grades)


def _format_terms(terms, n):
    names = [f"p{i + 1}" for i in range(n)] + [f"x{i + 1}" for i in range(n)] if n > 1 else ["p", "x"]
    parts = []
    for k in sorted(terms, key=lambda e: (sum(e), e)):
        v = terms[k]
        c = f"{v.real:g}" if v.imag == 0 else f"({v.real:g}{v.imag:+g}j)"
        mono = "*".join(f"{nm}^{e}" if e > 1 else nm for nm, e in zip(names, k) if e)
        parts.append(c if not mono else f"{c}*{mono}")
    return " + ".join(parts) if parts else "0"


class _SymbolParser:
    def __init__(self, n):
        self.n = n
        names = {}
        if n == 1:
            names["p"] = PolySymbol.p(0, 1)
            names["x"] = PolySymbol.x(0, 1)
        for i in range(n):
            names[f"p{i + 1}"] = PolySymbol.p(i, n)
            names[f"x{i + 1}"] = PolySymbol.x(i, n)
        names["I"] = 1j
        names["j"] = 1j
        names["hbar"] = PolySymbol(n, grades={1: {(0,) * (2 * n): 1.0}})
        self.names = names

    def parse(self, text):
        # '^' would otherwise parse as xor with the wrong precedence
        tree = ast.parse(text.strip().replace("^", "**"), mode="eval")
        out = self._eval(tree.body)
        if np.isscalar(out):
            out = PolySymbol.constant(out, self.n)
        return out

    def _eval(self, node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.Name):
            if node.id not in self.names:
                raise ValueError(f"unknown symbol {node.id!r}")
            return self.names[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self._eval(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a, b = self._eval(node.left), self._eval(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                if not np.isscalar(b):
                    raise ValueError("division by a symbol is not polynomial")
                return a / b
            if isinstance(node.op, ast.Pow):
                if not np.isscalar(b) or int(np.real(b)) != b:
                    raise ValueError("exponent must be a non-negative integer constant")
                return a ** int(np.real(b))
        raise ValueError(f"unsupported expression element {ast.dump(node)}")


def _require_ungraded(A, what):
    if A.is_graded:
        raise ValueError(f"{what} needs an ungraded symbol; collapse it with semiclassical_eval first")


# ---------------------------------------------------------------------------
# operations


def gradient(A):
    """Symbol vector ``grad A`` (list of 2n symbols)."""
    return [A._map(lambda t, i=i: _deriv_terms(t, i)) for i in range(A.nvars)]


def hessian(A):
    """Symbol matrix ``grad^2 A``; symmetric by construction (shared entries)."""
    g = gradient(A)
    nv = A.nvars
    H = [[None] * nv for _ in range(nv)]
    for i in range(nv):
        for j in range(i, nv):
            H[i][j] = H[j][i] = g[i]._map(lambda t, j=j: _deriv_terms(t, j))
    return H


def taylor_shift(A, point):
    """Return ``B`` with ``B(d) = A(point + d)`` for every ``d``."""
    point = np.asarray(point)
    if point.shape != (A.nvars,):
        raise DimensionMismatch(f"shift point of shape {point.shape}, expected ({A.nvars},)")
    return A._map(lambda t: _shift_terms(t, point))


@lru_cache(maxsize=None)
def _janus_powers(n, kmax):
    """Terms of ``(<-grad^T J ->grad)^k`` as dicts {(alpha_left, alpha_right): coeff}."""
    J = standard_J(n)
    nv = 2 * n
    unit = []
    for mu in range(nv):
        for nu in range(nv):
            if J[mu, nu] != 0:
                el = [0] * nv
                er = [0] * nv
                el[mu] = 1
                er[nu] = 1
                unit.append((tuple(el), tuple(er), J[mu, nu]))
    powers = [{((0,) * nv, (0,) * nv): 1.0}]
    for _ in range(kmax):
        nxt = {}
        for (al, ar), c in powers[-1].items():
            for el, er, j in unit:
                key = (tuple(a + b for a, b in zip(al, el)), tuple(a + b for a, b in zip(ar, er)))
                nxt[key] = nxt.get(key, 0) + c * j
        powers.append(_clean(nxt))
    return powers


def moyal_product(f, g, hbar):
    """
    Moyal product ``f * g`` by the (terminating) Groenewold series
    ``f exp(-(i hbar/2) <-grad^T J ->grad) g``.
    """
    _require_ungraded(f, "moyal_product")
    _require_ungraded(g, "moyal_product")
    if f.n != g.n:
        raise DimensionMismatch(f"symbols over {f.n} and {g.n} modes")
    kmax = min(_degree(f._terms), _degree(g._terms))
    powers = _janus_powers(f.n, kmax)
    out = {}
    pref = 1.0
    for k in range(kmax + 1):
        if k:
            pref = pref * (-0.5j * hbar) / k
        if pref == 0:
            break
        for (al, ar), c in powers[k].items():
            df = _deriv_multi(f._terms, al)
            if not df:
                continue
            dg = _deriv_multi(g._terms, ar)
            if not dg:
                continue
            _add_into(out, _mul_terms(df, dg), pref * c)
    return PolySymbol._raw(f.n, out, max_degree=f.max_degree)


def commutator_symbol(f, g, hbar):
    """Weyl symbol of ``[F, G]``: ``f*g - g*f``."""
    return moyal_product(f, g, hbar) - moyal_product(g, f, hbar)


def bopp_delta_product(A, mean, hbar):
    """
    Symbol vector of the operator products ``(q_mu - mean_mu) A``:
    ``(z - mean) A + (i hbar/2) J^T grad A``.
    """
    _require_ungraded(A, "bopp_delta_product")
    mean = np.asarray(mean, dtype=float)
    if mean.shape != (A.nvars,):
        raise DimensionMismatch(f"mean of shape {mean.shape}, expected ({A.nvars},)")
    JT = standard_J(A.n).T
    grad = gradient(A)
    out = []
    for mu in range(A.nvars):
        s = (PolySymbol.variable(mu, A.n) - mean[mu]) * A
        for nu in range(A.nvars):
            if JT[mu, nu]:
                s = s + grad[nu] * (0.5j * hbar * JT[mu, nu])
        out.append(s)
    return out


def wick_expectation(A, state):
    """
    Exact Gaussian expectation ``<A> = exp(1/2 grad^T M grad) A(<q>)``.

    Returns a complex number; for real-coefficient symbols the imaginary part
    is zero up to roundoff.
    """
    _require_ungraded(A, "wick_expectation")
    if A.nvars != state.mean.size:
        raise DimensionMismatch(f"symbol over {A.nvars} variables, state over {state.mean.size}")
    shifted = _shift_terms(A._terms, state.mean)
    return complex(gaussian_contract(shifted, 0.5 * np.asarray(state.cov)))


def char_function(state, a):
    """Characteristic function ``<exp(a^T q)> = exp(a^T M a/2 + a^T <q>)`` for complex ``a``."""
    a = np.asarray(a, dtype=complex)
    if a.shape != state.mean.shape:
        raise DimensionMismatch(f"argument of shape {a.shape}, expected {state.mean.shape}")
    return complex(np.exp(0.5 * a @ state.cov @ a + a @ state.mean))


def optics_char_function(state, lam):
    """Quantum-optics characteristic function ``tr(rho D(lam))``, ``D(lam) = exp(i q^T J^T lam)``."""
    lam = np.asarray(lam, dtype=complex)
    return char_function(state, 1j * standard_J(state.n).T @ lam)


def weyl_char_function(state, a):
    """Expectation of Weyl's characteristic operator ``exp((i/hbar) a^T q)``."""
    return char_function(state, 1j / state.hbar * np.asarray(a, dtype=complex))


def semiclassical_eval(A, hbar):
    """Collapse the hbar grading at a given ``hbar`` into an ungraded symbol."""
    out = dict(A._terms)
    for k, t in A._grades.items():
        _add_into(out, t, hbar**k / math.factorial(k))
    return PolySymbol._raw(A.n, out, max_degree=A.max_degree)


def classical_part(A):
    return PolySymbol._raw(A.n, dict(A._terms), max_degree=A.max_degree)


def monomials(nvars, max_degree):
    """All exponent tuples over ``nvars`` variables with total degree <= max_degree, graded order."""
    out = []
    for d in range(max_degree + 1):
        for combo in _compositions(d, nvars):
            out.append(combo)
    return out


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class WickEvaluator:
    """
    Batched Gaussian expectations of a fixed list of real symbols.

    Raw Gaussian moments ``E[z^alpha]`` up to the maximal degree are built by the
    recursion ``E[z_i z^a] = mu_i E[z^a] + sum_j M_ij a_j E[z^{a - e_j}]`` and
    contracted with a precomputed coefficient matrix.  This is the hot path of
    the integrator; it agrees with ``wick_expectation`` to roundoff.
    """

    def __init__(self, symbols):
        symbols = list(symbols)
        if not symbols:
            raise ValueError("need at least one symbol")
        nv = symbols[0].nvars
        for s in symbols:
            _require_ungraded(s, "WickEvaluator")
            if s.nvars != nv:
                raise DimensionMismatch("all symbols must share the phase-space dimension")
        self.nvars = nv
        self.max_degree = max(_degree(s._terms) for s in symbols)
        self.basis = monomials(nv, self.max_degree)
        index = {k: i for i, k in enumerate(self.basis)}
        coeffs = np.zeros((len(symbols), len(self.basis)), dtype=complex)
        for r, s in enumerate(symbols):
            for k, v in s._terms.items():
                coeffs[r, index[k]] += v
        self.imag_norm = float(np.abs(coeffs.imag).max()) if coeffs.size else 0.0
        self.coeffs = coeffs.real.copy()
        # plan: (target, i, parent, [(j, a_j, grandparent)])
        plan = []
        for t, k in enumerate(self.basis[1:], start=1):
            i = next(ii for ii, e in enumerate(k) if e)
            parent = list(k)
            parent[i] -= 1
            parent = tuple(parent)
            sub = []
            for j, aj in enumerate(parent):
                if aj:
                    gp = list(parent)
                    gp[j] -= 1
                    sub.append((j, aj, index[tuple(gp)]))
            plan.append((t, i, index[parent], sub))
        self._plan = plan

    def moments(self, mean, cov):
        m = np.empty(len(self.basis))
        m[0] = 1.0
        for t, i, par, sub in self._plan:
            acc = mean[i] * m[par]
            for j, aj, gp in sub:
                acc += cov[i, j] * aj * m[gp]
            m[t] = acc
        return m

    def __call__(self, mean, cov):
        return self.coeffs @ self.moments(np.asarray(mean, dtype=float), np.asarray(cov, dtype=float))


__all__ = [
    "PolySymbol",
    "gradient",
    "hessian",
    "taylor_shift",
    "moyal_product",
    "commutator_symbol",
    "bopp_delta_product",
    "wick_expectation",
    "char_function",
    "optics_char_function",
    "weyl_char_function",
    "semiclassical_eval",
    "classical_part",
    "gaussian_contract",
    "monomials",
    "WickEvaluator",
    "GaussianState",
]
