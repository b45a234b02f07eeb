import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhgeo.errors import DegenerateRadius, NearDefective, NonDiagonalizable
from nhgeo.spectral import (
    ComplexPoint3,
    Degeneracy,
    TwoLevelHamiltonian,
    biorthogonal_decompose,
    classify_degeneracy,
    complex_spherical_coords,
    continue_sign,
    csqrt,
    project_state,
    solve_two_level,
    track_branches,
)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)
points = st.builds(ComplexPoint3, cplx, cplx, cplx)


def test_csqrt_principal_and_signed_zero():
    assert csqrt(-4 - 0j) == 2j
    assert csqrt(-4 + 0j) == 2j
    assert csqrt(-2j) == pytest.approx(1 - 1j)


def test_spherical_real_equatorial_point():
    s = complex_spherical_coords(ComplexPoint3(3, 4, 0))
    assert s.R == pytest.approx(5)
    assert s.theta == pytest.approx(np.pi / 2)
    assert cmath.exp(1j * s.phi) == pytest.approx((3 + 4j) / 5)


def test_spherical_axis_flag():
    s = complex_spherical_coords(ComplexPoint3(0, 0, 1))
    assert s.R == pytest.approx(1) and s.theta == pytest.approx(0) and s.phi == 0
    assert s.axis


def test_spherical_imaginary_axis_principal():
    s = complex_spherical_coords(ComplexPoint3(0, 0, 1j))
    assert s.R == pytest.approx(1j)
    assert s.theta == pytest.approx(0)


def test_spherical_degenerate_raises():
    with pytest.raises(DegenerateRadius):
        complex_spherical_coords(ComplexPoint3(1, 1j, 0))


@settings(max_examples=200, deadline=None)
@given(points)
def test_spherical_identities(p):
    if abs(p.radius_sq()) < 1e-3 * max(p.norm(), 1) ** 2:
        return
    s = complex_spherical_coords(p)
    assert abs(s.cos_half**2 + s.sin_half**2 - 1) < 1e-12
    if s.axis:
        # x^2 + y^2 = 0 with (x, y) != 0 has no phi; only z is reconstructed
        assert abs(s.R * np.cos(s.theta) - p.z) < 1e-9 * max(p.norm(), 1.0)
        return
    q = s.to_point()
    scale = max(p.norm(), 1.0)
    assert abs(q.x - p.x) < 1e-9 * scale
    assert abs(q.y - p.y) < 1e-9 * scale
    assert abs(q.z - p.z) < 1e-9 * scale


def test_spherical_tracking_is_continuous():
    t = np.linspace(0, 1, 400)
    prev = None
    for tk in t:
        p = ComplexPoint3(np.cos(2 * np.pi * tk) + 0.2j, np.sin(2 * np.pi * tk), 0.5 - 0.3j)
        s = complex_spherical_coords(p, prev)
        if prev is not None:
            assert abs(s.R - prev.R) < 0.1
            assert abs(s.theta - prev.theta) < 0.1
            assert abs(s.phi - prev.phi) < 0.1
        prev = s


def test_matrix_layout():
    h = TwoLevelHamiltonian.from_xyz(1 + 1j, 2, 3j, lambda0=0.5)
    x, y, z = 1 + 1j, 2, 3j
    expected = np.array([[0.5 + z, x - 1j * y], [x + 1j * y, 0.5 - z]])
    assert np.array_equal(h.matrix(), expected)


def test_solve_two_level_examples():
    sys = solve_two_level(TwoLevelHamiltonian.from_xyz(1, 0, 0))
    assert np.allclose(sys.eigenvalues, [1, -1])
    u = sys.right / sys.right[1]
    assert np.allclose(u[:, 0], [1, 1]) and np.allclose(u[:, 1], [-1, 1])

    sys = solve_two_level(TwoLevelHamiltonian.from_xyz(0, 0, 1))
    chi, _ = sys.normalized()
    assert np.allclose(np.abs(chi), np.eye(2))


def test_solve_two_level_ep_merged_vector():
    sys = solve_two_level(TwoLevelHamiltonian.from_xyz(1, 1j, 0))
    assert sys.defective
    assert np.allclose(sys.eigenvalues, 0)
    assert np.all(sys.overlaps == 0)
    v = sys.right[:, 0]
    m = TwoLevelHamiltonian.from_xyz(1, 1j, 0).matrix()
    assert np.allclose(m @ v, 0)
    assert abs(sys.left[0] @ v) < 1e-14
    with pytest.raises(NearDefective):
        sys.normalized()


@settings(max_examples=300, deadline=None)
@given(points, cplx)
def test_two_level_biorthonormal(p, l0):
    if abs(p.radius_sq()) < 1e-2 * max(p.norm(), 1e-3) ** 2 or p.norm() < 1e-3:
        return
    h = TwoLevelHamiltonian(l0, p)
    sys = solve_two_level(h)
    chi, chit = sys.normalized()
    assert np.max(np.abs(chit @ chi - np.eye(2))) < 1e-10
    m = h.matrix()
    scale = max(p.norm(), abs(l0), 1)
    assert np.allclose(m @ chi, chi * sys.eigenvalues, atol=1e-10 * scale)
    assert np.allclose(chit @ m, sys.eigenvalues[:, None] * chit, atol=1e-10 * scale)


def test_classify_examples():
    assert classify_degeneracy(TwoLevelHamiltonian.from_xyz(0, 0, 0)).kind is Degeneracy.DIABOLIC
    assert classify_degeneracy(TwoLevelHamiltonian.from_xyz(1, 1j, 0)).kind is Degeneracy.EXCEPTIONAL
    c = classify_degeneracy(TwoLevelHamiltonian.from_xyz(1, 0, 0))
    assert c.kind is Degeneracy.REGULAR and c.witness == pytest.approx(1)


@settings(max_examples=100, deadline=None)
@given(points, st.floats(0, 2 * np.pi))
def test_classify_phase_invariance(p, a):
    u = cmath.exp(1j * a)
    h1 = TwoLevelHamiltonian(0, p)
    h2 = TwoLevelHamiltonian(0, p.scaled(u))
    assert classify_degeneracy(h1).kind is classify_degeneracy(h2).kind


def test_classify_matrix_input():
    assert classify_degeneracy(np.diag([1.0, 1.0, -1.0])).kind is Degeneracy.DIABOLIC
    assert classify_degeneracy(np.array([[0, 1], [0, 0]])).kind is Degeneracy.EXCEPTIONAL
    assert classify_degeneracy(np.diag([1.0, 2.0])).kind is Degeneracy.REGULAR


def test_decompose_examples():
    sys = biorthogonal_decompose(np.diag([1.0, -1.0]))
    assert np.allclose(sorted(sys.eigenvalues.real), [-1, 1])
    assert np.allclose(np.abs(sys.right), np.eye(2)[:, ::-1]) or np.allclose(np.abs(sys.right), np.eye(2))

    m = np.array([[1.0, 1.0], [0.0, -1.0]])
    sys = biorthogonal_decompose(m)
    for k, lam in enumerate(sys.eigenvalues):
        v, w = sys.right[:, k], sys.left[k]
        assert np.allclose(m @ v, lam * v) and np.allclose(w @ m, lam * w)
    i1 = int(np.argmin(np.abs(sys.eigenvalues - 1)))
    v = sys.right[:, i1] / sys.right[0, i1]
    assert np.allclose(v, [1, 0])
    vm = sys.right[:, 1 - i1] / sys.right[0, 1 - i1]
    assert np.allclose(vm, [1, -2])
    # overlaps {1, -2} for the scaled vectors (1,0),(1,-2) with (1,1/2),(0,1)
    wl = sys.left[i1] / sys.left[i1, 0]
    assert np.allclose(wl, [1, 0.5])


def test_decompose_jordan_block():
    with pytest.raises(NonDiagonalizable):
        biorthogonal_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_project_examples():
    sys = biorthogonal_decompose(np.diag([1.0, -1.0]))
    a = project_state(sys, np.array([1, 1]) / np.sqrt(2))
    assert np.allclose(sys.right @ a.alphas, np.array([1, 1]) / np.sqrt(2))
    assert np.allclose(np.abs(a.alphas), 1 / np.sqrt(2))

    m = np.array([[1.0, 1.0], [0.0, -1.0]])
    sys = biorthogonal_decompose(m)
    a = project_state(sys, np.array([1.0, 1.0]))
    scaled = a.alphas * sys.right[0]  # coefficients for the (1,0), (1,-2) normalization
    i1 = int(np.argmin(np.abs(sys.eigenvalues - 1)))
    assert scaled[i1] == pytest.approx(1.5) and scaled[1 - i1] == pytest.approx(-0.5)


def test_project_at_ep_raises():
    sys = solve_two_level(TwoLevelHamiltonian.from_xyz(1, 1j, 0))
    with pytest.raises(NearDefective):
        project_state(sys, [1, 0])


@pytest.mark.parametrize("seed", range(20))
def test_project_resynthesis_random_4x4(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    sys = biorthogonal_decompose(m)
    a = project_state(sys, psi)
    assert np.allclose(sys.right @ a.alphas, psi, atol=1e-10)
    assert np.allclose(a.alphas, np.linalg.solve(sys.right, psi), atol=1e-10)
    assert sys.biorthogonality_residual() < 1e-10


def test_decompose_degenerate_cluster_biorthogonal():
    rng = np.random.default_rng(3)
    s = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m = s @ np.diag([2.0, 2.0, -1.0]) @ np.linalg.inv(s)
    sys = biorthogonal_decompose(m)
    assert sys.biorthogonality_residual() < 1e-9


def test_continue_sign_removes_flips():
    v = np.exp(1j * np.linspace(0, 1, 50))
    flipped = v * np.where(np.arange(50) % 7 == 3, -1, 1)
    assert np.allclose(continue_sign(flipped), v)


def test_track_branches_sheet_flip_around_ep():
    phi = 2 * np.pi * np.linspace(0, 1, 257)
    X = 1 + 0.5 * np.exp(1j * phi)
    tr = track_branches(X, 0 * X, 1j + 0 * X)
    assert tr.closure_R == -1
    tr = track_branches(0.3 * np.cos(phi), 0.3 * np.sin(phi), 1.0 + 0 * phi)
    assert tr.closure_R == 1


def test_determinant_vanishes_toward_ep():
    rs = 10.0 ** -np.arange(1, 7)
    dets = []
    for r in rs:
        h = TwoLevelHamiltonian.from_xyz(np.sqrt(1 + r * r + 0j), 0, 1j)
        sys = solve_two_level(h, tol_ep=1e-15)
        v = sys.right / np.linalg.norm(sys.right, axis=0)
        dets.append(abs(np.linalg.det(v)))
    slope = np.polyfit(np.log(rs), np.log(dets), 1)[0]
    assert slope > 0.4
