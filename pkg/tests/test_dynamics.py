import numpy as np
import pytest
from scipy.linalg import expm

from nhgeo.dynamics import (
    CyclicState,
    DrivenAtomParams,
    TimeDependentHamiltonian,
    cyclic_states,
    evolve_pair,
    period_propagator,
    phases_decompose,
    rotating_field,
    rwa_hamiltonian,
    rwa_to_static,
    static_parameters,
)
from nhgeo.errors import GaugeMismatch, NonDiagonalizable, StepFailure
from nhgeo.geophase import drive_loop, gp_contour, gp_garrison_wright

PI = np.pi
TOL = 1e-10


def static(m, period=None):
    m = np.asarray(m, dtype=complex)
    return TimeDependentHamiltonian(lambda t: m, period)


def exact_rotating(B, theta, T):
    """Monodromy of B n(t).sigma by the rotating-frame solution."""
    w = 2 * PI / T
    H0 = np.array([[B * np.cos(theta), B * np.sin(theta)], [B * np.sin(theta), -B * np.cos(theta)]])
    Heff = H0 - 0.5 * w * np.diag([1.0, -1.0])
    return H0, Heff, -expm(-1j * Heff * T)


def test_static_diagonal():
    traj = evolve_pair(static(np.diag([1.0, -1.0])), [1, 0], [1, 0], 3.0, times=[0.5, 1.7, 3.0])
    assert np.allclose(traj.states[:, 0], np.exp(-1j * np.array([0.5, 1.7, 3.0])), atol=1e-12)
    assert np.allclose(traj.states[:, 1], 0)


def test_static_decay():
    g = 0.7
    t = np.linspace(0, 5, 11)
    traj = evolve_pair(static(np.diag([-0.5j * g, 0])), [1, 1], [1, 1], 5.0, times=t)
    assert np.allclose(np.abs(traj.states[:, 0]), np.exp(-g * t / 2), rtol=1e-10)
    assert np.allclose(np.abs(traj.states[:, 1]), 1)


@pytest.mark.parametrize(
    "h",
    [
        rotating_field(0.5, 1.0, 30.0),
        rwa_hamiltonian(DrivenAtomParams(0.4, 0.1, 0.3, lambda t: 0.5 * np.exp(0.3j * t), 20.0)),
        rwa_hamiltonian(DrivenAtomParams(2.0, 0.0, -1.0, 0.8, 10.0)),
        TimeDependentHamiltonian(
            lambda t: np.array([[np.sin(t), 1 - 0.2j, 0], [0.3, -1j * np.cos(t), 0.5], [0.1j, 0.2, 0.4]]), 2 * PI
        ),
    ],
    ids=["hermitian", "driven-decay", "strong-decay", "3-level"],
)
def test_pair_conservation(h):
    rng = np.random.default_rng(1)
    n = h.dim
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    psit = rng.normal(size=n) + 1j * rng.normal(size=n)
    traj = evolve_pair(h, psi, psit, h.period, TOL)
    assert traj.max_pair_drift() <= 10 * TOL * abs(traj.pair_products[0])


def test_period_propagator_zero_and_static():
    assert np.allclose(period_propagator(static(np.zeros((2, 2)), 1.0)), np.eye(2))
    m = np.array([[0.3, 0.2 - 0.1j], [0.5, -0.4j]])
    U = period_propagator(static(m, 3.0), TOL)
    assert np.max(np.abs(U - expm(-1j * m * 3.0))) < 10 * TOL
    m3 = np.array([[0.1, 1, 0], [0, -0.2j, 0.4], [0.3, 0, 1]])
    U = period_propagator(static(m3, 2.0), TOL)
    assert np.max(np.abs(U - expm(-1j * m3 * 2.0))) < 10 * TOL


def test_period_propagator_matches_exact_rotating():
    _, _, Uex = exact_rotating(0.5, PI / 3, 20.0)
    U = period_propagator(rotating_field(0.5, PI / 3, 20.0), TOL)
    assert np.max(np.abs(U - Uex)) < 1e-11


def test_determinant_identity():
    p = DrivenAtomParams(0.4, 0.1, 0.0, lambda t: 0.5 * np.cos(2 * PI * t / 7.0), 7.0)
    h = rwa_hamiltonian(p)
    U = period_propagator(h, TOL)
    assert abs(np.linalg.det(U) - np.exp(-0.5 * (p.gamma_a + p.gamma_b) * p.drive_period)) < 10 * TOL
    # traceless, H(t + T/2) = -H(t): det U = 1
    h2 = TimeDependentHamiltonian(lambda t: np.cos(t) * np.array([[1, 0.6j], [0.2, -1]]), 2 * PI)
    assert abs(np.linalg.det(period_propagator(h2, TOL)) - 1) < 10 * TOL


def test_convergence_with_tolerance():
    B, th, T = 0.5, PI / 3, 20.0
    _, _, Uex = exact_rotating(B, th, T)
    tols = [1e-5, 5e-6, 1e-6, 5e-7, 1e-7, 5e-8, 1e-8]
    errs = [np.max(np.abs(period_propagator(rotating_field(B, th, T), tol) - Uex)) for tol in tols]
    slope = np.polyfit(np.log(tols), np.log(errs), 1)[0]
    # sixth-order steps sized by a fourth-order estimate: err ~ tol^(6/5)
    assert slope >= 1.1
    assert errs[0] / errs[-1] >= 1000**1.1


def test_step_failure():
    with pytest.raises(StepFailure):
        evolve_pair(rotating_field(0.5, 1.0, 10.0), [1, 0], [1, 0], 1e4, max_steps=10)
    # H undefined past t = 0.5: every step straddling it is rejected until the size underflows
    blow = TimeDependentHamiltonian(lambda t: np.eye(2) * (0.3 if t < 0.5 else np.nan))
    with pytest.raises(StepFailure):
        evolve_pair(blow, [1, 0], [1, 0], 2.0)


def test_cyclic_states_examples():
    cs = cyclic_states(np.diag([1j, -1j]))
    assert sorted(c.phi.real for c in cs) == pytest.approx([-PI / 2, PI / 2])
    m = np.array([[0.2, 0.1], [0.3, -0.4]])
    cs = cyclic_states(expm(-1j * m * 2.0))
    lam = np.linalg.eigvals(m)
    for c in cs:
        d = (c.phi + lam * 2.0) / (2 * PI)
        assert np.min(np.abs(d - np.round(d.real))) < 1e-10
    cs = cyclic_states(np.diag([0.5, 0.9j]))
    assert all(c.phi.imag > 0 for c in cs)
    for c in cs:
        assert c.adjoint @ c.state == pytest.approx(1)
    with pytest.raises(NonDiagonalizable):
        cyclic_states(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_phases_static_eigenstate():
    m = np.array([[0.7, 0.2], [0.2, -0.3]])
    h = static(m, 4.0)
    lam, v = np.linalg.eigh(m)
    c = CyclicState(v[:, 0], v[:, 0], complex(-lam[0] * 4.0), complex(-lam[0] * 4.0))
    r = phases_decompose(h, c, TOL)
    assert abs(r.gamma) < 1e-9
    assert r.dynamical_phase == pytest.approx(-lam[0] * 4.0, abs=1e-9)


@pytest.mark.parametrize("T", [10.0, 100.0])
def test_phases_rotating_exact(T):
    B, th = 0.5, PI / 3
    H0, Heff, Uex = exact_rotating(B, th, T)
    h = rotating_field(B, th, T)
    cs = cyclic_states(period_propagator(h, TOL))
    lam, vec = np.linalg.eigh(Heff)
    for c in cs:
        r = phases_decompose(h, c, TOL)
        k = int(np.argmax(np.abs(vec.conj().T @ c.state)))
        u = vec[:, k]
        E = lam[k]
        # gamma = phi - delta with phi = pi - E T and delta = -<H0> T, mod 2 pi
        g_exact = PI - E * T + np.real(u.conj() @ H0 @ u) * T
        d = (r.gamma - g_exact) / (2 * PI)
        assert abs(d - round(d.real)) * 2 * PI < 1e-8
        total = r.gamma + r.dynamical_phase - r.total_phase
        assert abs(total / (2 * PI) - round(total.real / (2 * PI))) < 1e-12
        assert r.diagnostics["route_mismatch"] < 100 * TOL


def test_phases_nonhermitian_cyclic():
    p = DrivenAtomParams(0.3, 0.1, 0.0, lambda t: 0.6 * np.cos(2 * PI * t / 15.0), 15.0)
    h = rwa_hamiltonian(p)
    for c in cyclic_states(period_propagator(h, TOL)):
        r = phases_decompose(h, c, TOL)
        assert r.diagnostics["route_mismatch"] < 100 * TOL
        assert r.diagnostics["pair_drift"] < 10 * TOL


def test_gauge_mismatch_raised_with_inconsistent_state():
    h = rotating_field(0.5, 1.0, 10.0)
    c = cyclic_states(period_propagator(h, TOL))[0]
    bad = CyclicState(c.state, c.adjoint, c.phi + 0.1, c.phi + 0.1)
    with pytest.raises(GaugeMismatch):
        phases_decompose(h, bad, TOL)


def test_rwa_decoupled_decay():
    p = DrivenAtomParams(0.6, 0.2, 1.3, 0.0, 5.0)
    t = np.linspace(0, 5, 6)
    traj = evolve_pair(rwa_hamiltonian(p), [1, 0], [1, 0], 5.0, times=t)
    assert np.allclose(np.abs(traj.states[:, 0]) ** 2, np.exp(-0.6 * t))
    traj = evolve_pair(rwa_hamiltonian(p), [0, 1], [0, 1], 5.0, times=t)
    assert np.allclose(np.abs(traj.states[:, 1]) ** 2, np.exp(-0.2 * t))


def test_rwa_rabi():
    V = 0.7
    p = DrivenAtomParams(0.0, 0.0, 0.0, V, PI / V)
    t = np.linspace(0, 2 * PI / V, 9)
    traj = evolve_pair(rwa_hamiltonian(p), [1, 0], [1, 0], t[-1], times=t)
    assert np.allclose(np.abs(traj.states[:, 0]) ** 2, np.cos(V * t) ** 2, atol=1e-10)


def test_rwa_static_transform():
    p = DrivenAtomParams(0.5, 0.5, 0.8, 0.3 + 0.4j)
    h = rwa_to_static(p, 0.0)
    assert h.point.z.imag == 0 and h.lambda0 == pytest.approx(-0.25j)
    p = DrivenAtomParams(0.9, 0.1, 0.8, lambda t: 0.3 * np.exp(1j * t))
    h = rwa_to_static(p, 0.7)
    gap = np.diff(np.linalg.eigvals(h.matrix()))[0]
    V = p.drive(0.7)
    assert gap**2 == pytest.approx(abs(2 * V) ** 2 + (p.Delta - 1j * p.delta_decay) ** 2)
    assert np.trace(h.matrix()) == pytest.approx(-0.5j * (p.gamma_a + p.gamma_b))
    sp = static_parameters(p, 0.7)
    assert (sp["x"], sp["y"], sp["z"]) == pytest.approx((V.real, V.imag, p.Delta / 2))
    assert sp["epsilon"] == pytest.approx(p.delta_decay / 2)


def test_static_transform_is_the_rotating_frame():
    p = DrivenAtomParams(0.4, 0.1, 0.9, 0.35, 6.0)
    h = rwa_hamiltonian(p)
    hs = rwa_to_static(p, 0.0).matrix()
    t = 6.0
    traj = evolve_pair(h, [1, 0], [1, 0], t, times=[t])
    w = np.diag([np.exp(0.5j * p.Delta * t), np.exp(-0.5j * p.Delta * t)])
    assert np.allclose(traj.states[-1], w @ expm(-1j * hs * t) @ [1, 0], atol=1e-9)


def test_static_family_contour_matches_garrison_wright():
    p = DrivenAtomParams(0.8, 0.2, 0.5, 0.4)
    V0 = p.drive(0.0)
    r = gp_contour(drive_loop(V0, p.Delta, p.delta_decay))
    assert abs(r.gamma - gp_garrison_wright(V0, p.Delta, p.delta_decay).gamma) < 1e-6


def test_periodicity_residual():
    assert rotating_field(1.0, 0.3, 5.0).periodicity_residual() < 1e-12


def test_phases_static_in_rotating_frame():
    # V e^{-i Delta t} constant: few large steps, dynamical phase winds many times
    h = rwa_hamiltonian(DrivenAtomParams(0.4, 0.1, 0.3, lambda t: 0.5 * np.exp(0.3j * t), 20.0))
    for c in cyclic_states(period_propagator(h, TOL)):
        r = phases_decompose(h, c, TOL)
        assert abs(r.gamma) < 1e-9
        assert r.diagnostics["route_mismatch"] < 100 * TOL
