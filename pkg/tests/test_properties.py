"""Property-based checks of the algebraic identities on randomly drawn inputs."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import isserlis_moment
from scqa import dynamics, weyl
from scqa.phasespace import GaussianState, random_symplectic, standard_J, symplectic_check, symplectic_inverse
from scqa.weyl import PolySymbol

seeds = st.integers(min_value=0, max_value=2**32 - 1)
SETTINGS = settings(max_examples=40, deadline=None)


def state_from_seed(seed, n=1, hbar=1.0):
    rng = np.random.default_rng(seed)
    S = random_symplectic(n, rng, scale=0.5)
    nu = 0.5 * hbar * (1 + rng.random(n))
    M = S @ np.diag(np.concatenate([nu, nu])) @ S.T
    return GaussianState(rng.normal(scale=0.8, size=2 * n), M, hbar), rng


def symbol_from_seed(rng, n=1, degree=3, nterms=5):
    basis = weyl.monomials(2 * n, degree)
    pick = rng.choice(len(basis), size=min(nterms, len(basis)), replace=False)
    return PolySymbol(n, {basis[i]: float(rng.normal()) for i in pick})


@SETTINGS
@given(seeds, st.integers(1, 3))
def test_symplectic_inverse_property(seed, n):
    L = random_symplectic(n, np.random.default_rng(seed))
    assert symplectic_check(L) < 1e-9 * max(1.0, np.abs(L).max() ** 2)
    np.testing.assert_allclose(symplectic_inverse(L) @ L, np.eye(2 * n), atol=1e-8)


@SETTINGS
@given(seeds, st.integers(1, 2), st.floats(0.1, 2.0))
def test_uncertainty_of_generated_states(seed, n, hbar):
    s, _ = state_from_seed(seed, n, hbar)
    sigma0 = s.cov + 0.5j * hbar * standard_J(n).T
    assert np.linalg.eigvalsh(sigma0).min() >= -1e-10


@SETTINGS
@given(seeds, st.tuples(st.integers(0, 4), st.integers(0, 4)))
def test_wick_equals_isserlis(seed, exps):
    s, _ = state_from_seed(seed)
    val = weyl.wick_expectation(PolySymbol.monomial(exps), s)
    ref = isserlis_moment(exps, s.mean, s.cov)
    assert val == pytest.approx(ref, abs=1e-10 * max(1.0, abs(ref)))


@SETTINGS
@given(seeds)
def test_moyal_zero_hbar_is_pointwise(seed):
    rng = np.random.default_rng(seed)
    f, g = symbol_from_seed(rng), symbol_from_seed(rng)
    assert weyl.moyal_product(f, g, 0.0).allclose(f * g, atol=1e-12)


@SETTINGS
@given(seeds, st.floats(0.1, 2.0))
def test_commutator_antisymmetric_and_first_order(seed, hbar):
    rng = np.random.default_rng(seed)
    f, g = symbol_from_seed(rng), symbol_from_seed(rng)
    c = weyl.commutator_symbol(f, g, hbar)
    assert c.allclose(-weyl.commutator_symbol(g, f, hbar), atol=1e-12)
    # leading term is -i hbar times the Poisson bracket
    if all(sum(k) <= 2 for k in f.terms):
        gf, gg = weyl.gradient(f), weyl.gradient(g)
        J = standard_J(1)
        pb = sum((gf[a] * gg[b] * J[a, b] for a in range(2) for b in range(2) if J[a, b]), PolySymbol(1))
        assert c.allclose(pb * (-1j * hbar), atol=1e-12)


@SETTINGS
@given(seeds)
def test_gradient_identity(seed):
    # <[q, A]> = -i hbar J <grad A>
    s, rng = state_from_seed(seed)
    A = symbol_from_seed(rng, degree=5)
    J = standard_J(1)
    grads = np.array([weyl.wick_expectation(g, s) for g in weyl.gradient(A)])
    for mu in range(2):
        lhs = weyl.wick_expectation(weyl.commutator_symbol(PolySymbol.variable(mu), A, 1.0), s)
        assert lhs == pytest.approx(-1j * (J @ grads)[mu], abs=1e-10 * max(1.0, np.abs(grads).max()))


@SETTINGS
@given(seeds)
def test_bopp_shift_equals_moyal(seed):
    s, rng = state_from_seed(seed)
    A = symbol_from_seed(rng, degree=4)
    out = weyl.bopp_delta_product(A, s.mean, 0.8)
    for mu in range(2):
        ref = weyl.moyal_product(PolySymbol.variable(mu) - s.mean[mu], A, 0.8)
        assert out[mu].allclose(ref, atol=1e-12)


@SETTINGS
@given(seeds, st.floats(-2.0, 2.0))
def test_determinant_polynomial_symmetry(seed, mu):
    s, _ = state_from_seed(seed, n=2)
    inv = dynamics.universal_invariants(s.cov)
    J = standard_J(2)
    value = np.polyval(inv.Dcoeffs[::-1], mu)
    assert value == pytest.approx(np.linalg.det(s.cov - mu * J), rel=1e-9, abs=1e-12)
    assert value == pytest.approx(np.linalg.det(s.cov + mu * J), rel=1e-9, abs=1e-12)


@SETTINGS
@given(seeds)
def test_invariants_preserved_by_symplectic_maps(seed):
    s, rng = state_from_seed(seed, n=2)
    L = random_symplectic(2, rng, scale=0.4)
    a = dynamics.universal_invariants(s.cov, orders=(2, 4))
    b = dynamics.universal_invariants(L @ s.cov @ L.T, orders=(2, 4))
    assert b.detM == pytest.approx(a.detM, rel=1e-8)
    for m in (2, 4):
        assert b.L[m] == pytest.approx(a.L[m], rel=1e-8)
    np.testing.assert_allclose(b.Dcoeffs, a.Dcoeffs, rtol=1e-8, atol=1e-10)


@SETTINGS
@given(seeds)
def test_char_function_at_zero_and_conjugation(seed):
    s, rng = state_from_seed(seed)
    assert weyl.char_function(s, np.zeros(2)) == pytest.approx(1.0)
    lam = rng.normal(size=2)
    # <D(lam)>^* = <D(-lam)>
    assert np.conj(weyl.optics_char_function(s, lam)) == pytest.approx(weyl.optics_char_function(s, -lam))
