import numpy as np
import pytest
from scipy.integrate import trapezoid

from scqa.errors import DimensionMismatch, SingularCovariance, SymplecticDrift, UncertaintyViolation
from scqa.phasespace import (
    GaussianState,
    SymplecticPropagator,
    cov_evolve,
    evolve_wigner_point,
    heisenberg_q,
    mean_evolve,
    random_symplectic,
    standard_J,
    symplectic_check,
    symplectic_eigenvalues,
    symplectic_inverse,
    thermal_covariance,
    wigner_eval,
    williamson,
)


def rotation(t):
    return np.cos(t) * np.eye(2) + np.sin(t) * standard_J(1)


def test_standard_J_single_mode():
    np.testing.assert_array_equal(standard_J(1), [[0, 1], [-1, 0]])


def test_standard_J_two_modes():
    J = standard_J(2)
    np.testing.assert_array_equal(J[:2, 2:], np.eye(2))
    np.testing.assert_array_equal(J[2:, :2], -np.eye(2))
    np.testing.assert_array_equal(J[:2, :2], 0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_J_squares_to_minus_identity(n):
    J = standard_J(n)
    np.testing.assert_array_equal(J @ J, -np.eye(2 * n))
    np.testing.assert_array_equal(J.T, -J)


@pytest.mark.parametrize("n", [0, -1, 1.5])
def test_standard_J_rejects_bad_dims(n):
    with pytest.raises(DimensionMismatch):
        standard_J(n)


def test_symplectic_inverse_identity():
    np.testing.assert_allclose(symplectic_inverse(np.eye(2)), np.eye(2), atol=0)


def test_symplectic_inverse_rotation():
    t = 0.3
    expected = np.cos(t) * np.eye(2) - np.sin(t) * standard_J(1)
    np.testing.assert_allclose(symplectic_inverse(rotation(t)), expected, atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_symplectic_inverse_random(n):
    rng = np.random.default_rng(n)
    L = random_symplectic(n, rng)
    X = np.linalg.solve(L, np.eye(2 * n))
    np.testing.assert_allclose(symplectic_inverse(L), X, atol=1e-10)
    np.testing.assert_allclose(symplectic_inverse(L) @ L, np.eye(2 * n), atol=1e-10)


def test_symplectic_inverse_drift():
    L = np.eye(2) + 1e-3 * np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(SymplecticDrift):
        symplectic_inverse(L)


@pytest.mark.parametrize("L", [np.eye(2), standard_J(1), standard_J(2)])
def test_symplectic_check_zero(L):
    assert symplectic_check(L) == 0


def test_symplectic_check_perturbed():
    P = np.array([[1.0, 0.2], [0.0, 0.5]])
    L = np.eye(2) + 1e-3 * P
    J = standard_J(1)
    assert symplectic_check(L) == pytest.approx(np.abs(L.T @ J @ L - J).max(), rel=1e-12)
    assert symplectic_check(L) > 0


def test_symplectic_check_shape():
    with pytest.raises(DimensionMismatch):
        symplectic_check(np.eye(3))
    with pytest.raises(DimensionMismatch):
        symplectic_check(np.ones((2, 4)))


def test_vacuum_wigner_origin():
    assert wigner_eval(GaussianState.vacuum(), [0, 0]) == pytest.approx(1 / np.pi, rel=1e-14)


def test_wigner_at_mean():
    M = np.array([[1.3, 0.2], [0.2, 0.7]])
    s = GaussianState([0.4, -1.0], M)
    assert wigner_eval(s, s.mean) == pytest.approx(np.linalg.det(2 * np.pi * M) ** -0.5, rel=1e-14)


def test_wigner_normalized():
    s = GaussianState([0.3, -0.2], [[0.9, 0.3], [0.3, 0.6]])
    g = np.linspace(-9, 9, 721)
    P, X = np.meshgrid(g, g, indexing="ij")
    W = wigner_eval(s, np.stack([P, X], axis=-1))
    assert trapezoid(trapezoid(W, g, axis=1), g) == pytest.approx(1.0, abs=1e-6)


def test_wigner_singular():
    s = GaussianState([0, 0], [[1.0, 0.0], [0.0, 1.0]])
    object.__setattr__(s, "cov", np.zeros((2, 2)))
    with pytest.raises(SingularCovariance):
        wigner_eval(s, [0, 0])


def test_uncertainty_violation():
    with pytest.raises(UncertaintyViolation):
        GaussianState([0, 0], 0.2 * np.eye(2))
    # allowed at smaller hbar
    GaussianState([0, 0], 0.2 * np.eye(2), hbar=0.4)


def test_state_validation():
    with pytest.raises(ValueError):
        GaussianState([0, 0], [[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(DimensionMismatch):
        GaussianState([0, 0, 0], np.eye(3))
    with pytest.raises(ValueError):
        GaussianState([0, 0], np.eye(2), hbar=0)


def test_state_immutable():
    s = GaussianState.vacuum()
    with pytest.raises(ValueError):
        s.mean[0] = 1.0


def test_evolve_wigner_identity():
    s = GaussianState([0.2, 0.1], [[0.8, 0.1], [0.1, 0.5]])
    z = np.array([0.5, -0.3])
    assert evolve_wigner_point(s, SymplecticPropagator.identity(), z) == wigner_eval(s, z)


def test_vacuum_rotation_invariant():
    s = GaussianState.vacuum()
    prop = SymplecticPropagator(rotation(0.8), [0, 0])
    z = np.array([0.4, 0.9])
    assert evolve_wigner_point(s, prop, z) == pytest.approx(wigner_eval(s, z), rel=1e-14)


def test_evolved_wigner_is_gaussian_with_moved_moments():
    rng = np.random.default_rng(3)
    s = GaussianState([0.5, -0.2], [[1.1, 0.3], [0.3, 0.7]])
    prop = SymplecticPropagator(random_symplectic(1, rng), [0.3, -0.4])
    moved = GaussianState(mean_evolve(prop, s.mean), cov_evolve(prop, s.cov))
    for z in rng.normal(size=(5, 2)):
        assert evolve_wigner_point(s, prop, z) == pytest.approx(wigner_eval(moved, z), rel=1e-10)


def test_free_particle_covariance():
    t = 1.0
    prop = SymplecticPropagator([[1, 0], [-t, 1]], [0, 0], t)
    np.testing.assert_allclose(prop.inverse, [[1, 0], [1, 1]], atol=1e-15)
    np.testing.assert_allclose(cov_evolve(prop, 0.5 * np.eye(2)), 0.5 * np.array([[1, 1], [1, 2]]), atol=1e-15)


def test_rotation_fixes_vacuum_covariance():
    for t in np.linspace(0, 6, 7):
        prop = SymplecticPropagator(rotation(t), [0, 0], t)
        np.testing.assert_allclose(cov_evolve(prop, 0.5 * np.eye(2)), 0.5 * np.eye(2), atol=1e-15)


def test_heisenberg_identity():
    K, c = heisenberg_q(SymplecticPropagator.identity())
    np.testing.assert_array_equal(K, np.eye(2))
    np.testing.assert_array_equal(c, 0)


def test_heisenberg_harmonic():
    t = 0.7
    # the oscillator propagator is lam = exp(tJ)
    K, _ = heisenberg_q(SymplecticPropagator(rotation(t), [0, 0], t))
    np.testing.assert_allclose(K[1], [np.sin(t), np.cos(t)], atol=1e-15)


def test_heisenberg_free_particle():
    K, _ = heisenberg_q(SymplecticPropagator([[1, 0], [-2.0, 1]], [0, 0], 2.0))
    np.testing.assert_allclose(K[1], [2.0, 1.0], atol=1e-15)


def test_propagator_validation():
    with pytest.raises(SymplecticDrift):
        SymplecticPropagator(2 * np.eye(2), [0, 0])
    with pytest.raises(DimensionMismatch):
        SymplecticPropagator(np.eye(2), [0, 0, 0])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_williamson_reconstructs(n):
    rng = np.random.default_rng(10 + n)
    A = rng.normal(size=(2 * n, 2 * n))
    B = A @ A.T + 0.5 * np.eye(2 * n)
    S, omega = williamson(B)
    assert symplectic_check(S) < 1e-10
    np.testing.assert_allclose(S.T @ np.diag(np.concatenate([omega, omega])) @ S, B, atol=1e-10)
    np.testing.assert_allclose(np.sort(omega), symplectic_eigenvalues(B), rtol=1e-10)


def test_thermal_covariance_single_mode():
    B = np.diag([1.0, 1.6])
    M = thermal_covariance(B, 0.5)
    np.testing.assert_allclose(M, 0.5 * np.sqrt(1.6) * np.linalg.inv(B), atol=1e-14)


@pytest.mark.parametrize("n", [1, 2])
def test_thermal_covariance_is_stationary(n):
    rng = np.random.default_rng(n)
    A = rng.normal(size=(2 * n, 2 * n))
    B = A @ A.T + np.eye(2 * n)
    nu = 0.5 + rng.random(n)
    M = thermal_covariance(B, nu)
    X = standard_J(n) @ B @ M
    np.testing.assert_allclose(X + X.T, 0, atol=1e-10)
    np.testing.assert_allclose(symplectic_eigenvalues(M), np.sort(nu), rtol=1e-10)


@pytest.mark.parametrize(
    "factory",
    [
        lambda: GaussianState.vacuum(2),
        lambda: GaussianState.coherent([1.0, 2.0]),
        lambda: GaussianState.squeezed(0.8, phi=0.4),
        lambda: GaussianState.thermal(1.5, n=2),
    ],
)
def test_families_satisfy_uncertainty(factory):
    s = factory()
    assert np.linalg.eigvalsh(s.sigma0).min() >= -1e-10
