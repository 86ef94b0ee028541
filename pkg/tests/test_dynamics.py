import numpy as np
import pytest
from scipy.linalg import expm

from oracles import random_state
from scqa import dynamics as dy
from scqa import oracle, weyl
from scqa.errors import ConservationDrift, NoConvergence, NonRealHamiltonian, OutOfRange, SymplecticDrift
from scqa.phasespace import GaussianState, SymplecticPropagator, standard_J, symplectic_eigenvalues
from scqa.weyl import PolySymbol

P = PolySymbol.parse
HARMONIC = P("0.5*p^2 + 0.5*x^2")
QUARTIC = P("0.5*p^2 + 0.5*x^2 + 0.1*x^4")
FAST = dy.IntegratorOptions(step=1e-2, sample_every=10)


@pytest.fixture(scope="module")
def quartic_eq():
    return dy.stationary_solve(QUARTIC, 0.5 * np.eye(2))


@pytest.fixture(scope="module")
def quartic_traj():
    s = GaussianState([0.2, 0.5], [[0.7, 0.05], [0.05, 0.45]])
    return dy.integrate(QUARTIC, s, 2.0, dy.IntegratorOptions(step=1e-3, sample_every=50))


def test_coefficients_harmonic():
    co = dy.sc_coefficients(HARMONIC, random_state(np.random.default_rng(0)))
    np.testing.assert_allclose(co.B, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(co.C, 0, atol=1e-14)


def test_coefficients_quartic_vacuum():
    co = dy.sc_coefficients(QUARTIC, GaussianState.vacuum())
    np.testing.assert_allclose(co.B, np.diag([1.0, 1.6]), atol=1e-14)
    np.testing.assert_allclose(co.C, 0, atol=1e-14)


def test_coefficients_linear():
    co = dy.sc_coefficients(P("x"), GaussianState.vacuum())
    np.testing.assert_array_equal(co.B, 0)
    np.testing.assert_allclose(co.C, [0, 1])


def test_coefficients_symmetric():
    H = P("p^3*x + p*x^3 + x^4 + p^2")
    co = dy.sc_coefficients(H, random_state(np.random.default_rng(1)))
    assert np.array_equal(co.B, co.B.T)


def test_complex_hamiltonian_rejected():
    with pytest.raises(NonRealHamiltonian):
        dy.sc_coefficients(P("x^2") * 1j, GaussianState.vacuum())
    with pytest.raises(NonRealHamiltonian):
        dy.integrate(P("x^2") * 1j, GaussianState.vacuum(), 1.0)


def test_rhs_examples():
    vac = GaussianState.vacuum()
    dl, dd = dy.scqa_rhs(HARMONIC, SymplecticPropagator.identity(), vac)
    np.testing.assert_allclose(dl, standard_J(1))
    np.testing.assert_allclose(dd, 0)
    dl, _ = dy.scqa_rhs(P("0.5*p^2"), SymplecticPropagator.identity(), vac)
    np.testing.assert_allclose(dl, standard_J(1) @ np.diag([1.0, 0.0]))
    dl, _ = dy.scqa_rhs(QUARTIC, SymplecticPropagator.identity(), vac)
    np.testing.assert_allclose(dl, standard_J(1) @ np.diag([1.0, 1.6]), atol=1e-14)


def test_rhs_matches_compiled_path():
    rng = np.random.default_rng(4)
    s = random_state(rng)
    prop = dy.propagate(QUARTIC, s, 0.3)
    ref = dy.scqa_rhs(QUARTIC, prop, s)
    fast = dy._Rhs(QUARTIC, s, "wick")(np.asarray(prop.lam), np.asarray(prop.delta))
    np.testing.assert_allclose(fast[0], ref[0], atol=1e-12)
    np.testing.assert_allclose(fast[1], ref[1], atol=1e-12)


def test_harmonic_period():
    s = GaussianState.squeezed(0.3, (0.4, 1.0))
    traj = dy.integrate(HARMONIC, s, 2 * np.pi, dy.IntegratorOptions(sample_every=1000))
    np.testing.assert_allclose(traj.lam[-1], np.eye(2), atol=1e-6)
    np.testing.assert_allclose(traj.delta[-1], 0, atol=1e-6)


def test_free_particle_ballistic():
    traj = dy.integrate(P("0.5*p^2"), GaussianState.coherent([1.0, 0.0]), 3.0, dy.IntegratorOptions(sample_every=100))
    np.testing.assert_allclose(traj.mean[-1], [1.0, 3.0], atol=1e-10)
    np.testing.assert_allclose(traj.lam[-1], [[1, 0], [-3, 1]], atol=1e-10)


def test_quadratic_with_linear_term_exact():
    B = np.array([[1.0, 0.2], [0.2, 2.0]])
    c = np.array([0.3, -0.5])
    H = P("0.5*p^2 + 0.2*p*x + x^2 + 0.3*p - 0.5*x")
    s = random_state(np.random.default_rng(5))
    traj = dy.integrate(H, s, 3.0, dy.IntegratorOptions(sample_every=500))
    J = standard_J(1)
    for t, mean, cov in zip(traj.t, traj.mean, traj.cov):
        # dq/dt = -J (B q + c)
        A = np.zeros((3, 3))
        A[:2, :2] = -J @ B
        A[:2, 2] = -J @ c
        E = expm(t * A)
        np.testing.assert_allclose(mean, E[:2, :2] @ s.mean + E[:2, 2], atol=1e-9)
        np.testing.assert_allclose(cov, E[:2, :2] @ s.cov @ E[:2, :2].T, atol=1e-9)


def test_quartic_short_time_vs_oracle():
    s = GaussianState.vacuum()
    traj = dy.integrate(QUARTIC, s, 0.5, dy.IntegratorOptions(sample_every=100))
    d = 60
    Hop = oracle.weyl_quantize(QUARTIC, d)
    rho = oracle.gaussian_to_fock(s, d)
    Xop = oracle.weyl_quantize(P("x"), d)
    Pop = oracle.weyl_quantize(P("p"), d)
    for t, mean in zip(traj.t, traj.mean):
        r = oracle.oracle_evolve(Hop, rho, t)
        ref = np.array([oracle.oracle_expect(Pop, r).real, oracle.oracle_expect(Xop, r).real])
        assert np.linalg.norm(mean - ref) <= 1e-3


def test_displaced_quartic_matches_oracle_at_short_times():
    s = GaussianState.coherent([0.0, 0.5])
    traj = dy.integrate(QUARTIC, s, 0.1, dy.IntegratorOptions(sample_every=100))
    d = 60
    r = oracle.oracle_evolve(oracle.weyl_quantize(QUARTIC, d), oracle.gaussian_to_fock(s, d), 0.1)
    x = oracle.oracle_expect(oracle.weyl_quantize(P("x"), d), r).real
    # Gaussian closure error enters at higher order in t
    assert abs(traj.mean[-1][1] - x) < 1e-4


def test_energy_vacuum():
    assert dy.energy(HARMONIC, GaussianState.vacuum()) == pytest.approx(0.5)


def test_harmonic_conservation():
    traj = dy.integrate(HARMONIC, GaussianState.squeezed(0.4, (0.3, 0.8)), 10.0, dy.IntegratorOptions(sample_every=500))
    drifts = dy.conservation_monitor(traj)
    assert max(v for k, v in drifts.items() if k != "symplectic") <= 1e-9
    assert drifts["symplectic"] <= 1e-8


def test_quartic_entropy_surrogate(quartic_traj):
    nu0 = symplectic_eigenvalues(quartic_traj.cov[0])
    for M in quartic_traj.cov:
        np.testing.assert_allclose(symplectic_eigenvalues(M), nu0, atol=1e-8)


def test_invariants_vacuum():
    inv = dy.universal_invariants(0.5 * np.eye(2), orders=(2, 3))
    assert inv.detM == pytest.approx(0.25)
    assert inv.L[2] == pytest.approx(-0.5)
    assert inv.L[3] == pytest.approx(0, abs=1e-14)


@pytest.mark.parametrize("n", [1, 2])
def test_D_polynomial_even(n):
    rng = np.random.default_rng(n)
    A = rng.normal(size=(2 * n, 2 * n))
    M = A + A.T
    inv = dy.universal_invariants(M, orders=(1, 3, 5))
    np.testing.assert_allclose(inv.Dcoeffs[1::2], 0, atol=1e-10)
    assert all(abs(v) < 1e-10 for v in inv.L.values())
    assert inv.Dcoeffs[0] == pytest.approx(np.linalg.det(M))


def test_single_mode_D_polynomial():
    M = np.array([[1.2, 0.3], [0.3, 0.7]])
    # det(M - mu J) = det M + mu^2 for n = 1
    np.testing.assert_allclose(dy.universal_invariants(M).Dcoeffs, [np.linalg.det(M), 0, 1], atol=1e-13)


def test_symplectic_drift_abort():
    opts = dy.IntegratorOptions(step=0.5, symplectic_tol=1e-12, conservation_tol=None)
    with pytest.raises(SymplecticDrift) as exc:
        dy.integrate(QUARTIC, GaussianState.coherent([1.0, 1.0]), 5.0, opts)
    assert exc.value.t is not None and exc.value.t > 0


def test_conservation_drift_abort():
    opts = dy.IntegratorOptions(step=0.2, symplectic_tol=None, conservation_tol=1e-9)
    with pytest.raises(ConservationDrift) as exc:
        dy.integrate(QUARTIC, GaussianState.coherent([1.0, 1.0]), 5.0, opts)
    assert exc.value.t > 0


@pytest.mark.parametrize(
    "kwargs", [{"step": 0}, {"closure": "other"}, {"sample_every": 0}, {"symplectic_tol": -1.0}, {"method": "euler"}]
)
def test_options_validation(kwargs):
    with pytest.raises(ValueError):
        dy.IntegratorOptions(**kwargs)


def test_gwp_closure_differs_for_anharmonic():
    s = GaussianState.vacuum()
    wick = dy.integrate(QUARTIC, s, 1.0, FAST)
    gwp = dy.integrate(QUARTIC, s, 1.0, dy.IntegratorOptions(step=1e-2, sample_every=10, closure="gwp"))
    assert np.abs(wick.cov[-1] - gwp.cov[-1]).max() > 1e-3
    harmonic = dy.integrate(HARMONIC, s, 1.0, dy.IntegratorOptions(step=1e-2, sample_every=10, closure="gwp"))
    np.testing.assert_allclose(harmonic.cov[-1], 0.5 * np.eye(2), atol=1e-10)


def test_stationary_residual_examples():
    assert dy.stationary_residual(HARMONIC, GaussianState([0, 0], np.eye(2))) == 0
    assert dy.stationary_residual(HARMONIC, GaussianState([0, 0], np.diag([0.9, 1.4]))) == 0


def test_stationary_residual_quartic_by_hand():
    s = GaussianState.vacuum()
    co = dy.sc_coefficients(QUARTIC, s)
    g = co.C + co.B @ s.mean
    J = standard_J(1)
    expected = g @ J @ s.mean - np.trace(J @ co.B @ s.cov)
    assert dy.stationary_residual(QUARTIC, s) == pytest.approx(expected, abs=1e-15)


def test_stationary_harmonic():
    st, info = dy.stationary_solve(HARMONIC, 0.5 * np.eye(2), alpha=1.0, full_output=True)
    np.testing.assert_allclose(st.cov, 0.5 * np.eye(2), atol=1e-14)
    assert info["iterations"] <= 2


def test_stationary_quartic(quartic_eq):
    assert abs(dy.stationary_residual(QUARTIC, quartic_eq)) < 1e-8
    assert dy.stationarity_defect(QUARTIC, quartic_eq) < 1e-8
    # self-consistency: B evaluated in the solution reproduces its covariance
    B = dy.sc_coefficients(QUARTIC, quartic_eq).B
    np.testing.assert_allclose(quartic_eq.cov, 0.5 * np.sqrt(np.linalg.det(B)) * np.linalg.inv(B), atol=1e-9)


def test_stationary_state_does_not_move(quartic_eq):
    traj = dy.integrate(QUARTIC, quartic_eq, 5.0, dy.IntegratorOptions(sample_every=1000))
    np.testing.assert_allclose(traj.cov[-1], quartic_eq.cov, atol=1e-9)


def test_stationary_two_modes():
    H = P("0.5*p1^2 + 0.5*p2^2 + 0.5*x1^2 + x2^2 + 0.2*x1*x2 + 0.05*x1^4", n=2)
    st = dy.stationary_solve(H, 0.5 * np.eye(4))
    assert dy.stationarity_defect(H, st) < 1e-8


def test_stationary_thermal_seed_keeps_spectrum():
    st = dy.stationary_solve(QUARTIC, np.eye(2))
    np.testing.assert_allclose(symplectic_eigenvalues(st.cov), [1.0], atol=1e-9)


def test_free_particle_no_stationary_state():
    with pytest.raises(NoConvergence):
        dy.stationary_solve(P("0.5*p^2"), 0.5 * np.eye(2))


@pytest.mark.parametrize("A", ["x", "p", "x^2", "p*x", "x^3"])
def test_ehrenfest_quartic(quartic_traj, A):
    assert dy.ehrenfest_residual(P(A), QUARTIC, quartic_traj, 1.0, 1e-4) <= 1e-5


@pytest.mark.parametrize("A", ["x", "p", "x^2", "p*x", "x^3"])
def test_ehrenfest_harmonic(A):
    traj = dy.integrate(HARMONIC, GaussianState.squeezed(0.2, (0.5, 0.3)), 2.0, dy.IntegratorOptions(sample_every=50))
    assert dy.ehrenfest_residual(P(A), HARMONIC, traj, 1.3, 1e-4) <= 1e-5


def test_ehrenfest_energy(quartic_traj):
    assert dy.ehrenfest_residual(QUARTIC, QUARTIC, quartic_traj, 0.77, 1e-4) <= 1e-6


def test_ehrenfest_out_of_range(quartic_traj):
    with pytest.raises(OutOfRange):
        dy.ehrenfest_residual(P("x"), QUARTIC, quartic_traj, 0.0, 1e-4)
    with pytest.raises(OutOfRange):
        quartic_traj.state_at(5.0)


def test_trajectory_csv(tmp_path, quartic_traj):
    path = tmp_path / "traj.csv"
    quartic_traj.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].split(",")[:2] == ["t", "lam_0_0"]
    assert lines[0].split(",")[-5:] == ["energy", "detM", "L_2", "L_4", "symplectic_residual"]
    assert len(lines) == len(quartic_traj) + 1
    row = np.array(lines[1].split(","), dtype=float)
    assert row[0] == 0 and row[1] == 1


def test_trajectory_times_increasing(quartic_traj):
    assert np.all(np.diff(quartic_traj.t) > 0)
    assert quartic_traj.t[-1] == pytest.approx(2.0)


def test_propagate_negative_time():
    s = GaussianState.vacuum()
    fwd = dy.propagate(HARMONIC, s, 0.4)
    back = dy.propagate(HARMONIC, s, -0.4)
    np.testing.assert_allclose(fwd.lam @ back.lam, np.eye(2), atol=1e-12)


def test_wick_evaluator_zero_cov_is_point_value():
    ev = weyl.WickEvaluator([QUARTIC])
    z = np.array([0.3, -0.7])
    assert ev(z, np.zeros((2, 2)))[0] == pytest.approx(QUARTIC(z).real)
