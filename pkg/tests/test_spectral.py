import math

import numpy as np
import pytest

from nhqw.core import Boundary, WalkParams, WalkState, coin_matrix, loss_matrix, step
from nhqw.errors import BandTrackingError, NumericalError, ValidationError
from nhqw.spectral import (
    SpectrumResult,
    bloch_matrix,
    curve_distance,
    dense_walk_matrix,
    dominant_edge,
    edge_mass,
    obc_spectrum,
    pbc_spectrum,
    point_gap_winding,
    quasienergy,
    spectral_loop_area,
)

THETA45 = math.radians(45)

# One-time oracle run: closed-form 2x2 eigenvalues at 4096 k-points, area of
# each of the two loops at theta=45 deg, gamma=0.1. Frozen here.
LOOP_AREA_ORACLE = 0.09217718378


def lossy(theta=THETA45, gamma=0.1, boundary=None):
    return WalkParams(theta, gamma, boundary or Boundary.infinite())


def det_winding(theta, gamma, E0, k_samples=4096):
    """Point-gap winding from the argument of det(U_k - lam0), no band tracking.

    Uses the trace and determinant of the Bloch matrix written out by hand:
    tr = cos(theta) (e^{-ik} - e^{-gamma} e^{ik}), det = -e^{-gamma}.
    """
    k = -math.pi + 2 * math.pi * np.arange(k_samples + 1) / k_samples
    lam0 = np.exp(-1j * np.asarray(E0, dtype=complex))[..., None]
    tr = math.cos(theta) * (np.exp(-1j * k) - math.exp(-gamma) * np.exp(1j * k))
    f = lam0 * lam0 - tr * lam0 - math.exp(-gamma)
    return np.rint(np.sum(np.angle(f[..., 1:] / f[..., :-1]), axis=-1) / (2 * math.pi))


# -- Bloch matrix ------------------------------------------------------------

@pytest.mark.parametrize("k", [-3.0, -1.1, 0.0, 0.4, 2.9])
@pytest.mark.parametrize("theta", [0.2, THETA45, 1.3])
def test_unitary_bloch_eigenvalues_on_circle(k, theta):
    lam = np.linalg.eigvals(bloch_matrix(k, theta, 0.0).matrix)
    np.testing.assert_allclose(np.abs(lam), 1.0, atol=1e-12)


@pytest.mark.parametrize("k", [-2.0, 0.3, 1.7])
@pytest.mark.parametrize("gamma", [0.0, 0.1, 0.7])
def test_bloch_determinant(k, gamma):
    b = bloch_matrix(k, 0.8, gamma)
    assert abs(np.prod(b.eigenvalues)) == pytest.approx(math.exp(-gamma), rel=1e-12)
    assert np.sum(quasienergy(b.eigenvalues).imag) == pytest.approx(-gamma, abs=1e-12)


def test_bloch_sign_convention():
    # e^{ikx} u must be an eigenvector of the real-space ring with the same eigenvalue
    N = 12
    U = dense_walk_matrix(lossy(0.7, 0.2, Boundary.periodic(N)))
    k = 2 * math.pi * 3 / N
    lam, vecs = np.linalg.eig(bloch_matrix(k, 0.7, 0.2).matrix)
    x = np.arange(N)
    for j in range(2):
        psi = np.kron(np.exp(1j * k * x), vecs[:, j])
        np.testing.assert_allclose(U @ psi, lam[j] * psi, atol=1e-12)


def test_quasienergy_branch():
    E = quasienergy(np.array([-1.0 + 0j, 1j, -1j, 0.5]))
    np.testing.assert_allclose(E, [math.pi, -math.pi / 2, math.pi / 2, 1j * math.log(0.5)])


# -- PBC spectrum --------------------------------------------------------------

def test_lossless_pbc_is_real():
    pbc = pbc_spectrum(lossy(gamma=0.0), 1024)
    assert np.max(np.abs(pbc.energies.imag)) < 1e-10
    assert max(spectral_loop_area(pbc)) < 1e-8


def test_pbc_determinant_identity_and_round_trip():
    pbc = pbc_spectrum(lossy(gamma=0.1), 512)
    np.testing.assert_allclose(pbc.energies.imag.sum(axis=0), -0.1, atol=1e-10)
    np.testing.assert_allclose(np.exp(-1j * pbc.energies), pbc.eigenvalues, atol=1e-10)
    assert np.all((pbc.energies.real > -math.pi) & (pbc.energies.real <= math.pi))


def test_refinement_interleaves():
    coarse = pbc_spectrum(lossy(), 256)
    fine = pbc_spectrum(lossy(), 512)
    np.testing.assert_allclose(fine.k[::2], coarse.k, atol=1e-15)
    for m in range(256):
        assert sorted(coarse.eigenvalues[:, m], key=lambda z: (z.real, z.imag)) == pytest.approx(
            sorted(fine.eigenvalues[:, 2 * m], key=lambda z: (z.real, z.imag)), abs=1e-14
        )


def test_pbc_requires_enough_samples():
    with pytest.raises(ValidationError):
        pbc_spectrum(lossy(), 8)


def test_pbc_tracking_continuity():
    pbc = pbc_spectrum(lossy(), 1024)
    assert pbc.tracked
    steps = np.abs(np.diff(pbc.eigenvalues, axis=1))
    assert np.max(steps) < 0.05


def test_loop_area_matches_frozen_oracle():
    areas = spectral_loop_area(pbc_spectrum(lossy(), 4096))
    assert areas == pytest.approx([LOOP_AREA_ORACLE] * 2, abs=1e-9)


def test_loop_area_grid_convergence():
    a1 = spectral_loop_area(pbc_spectrum(lossy(), 1024))
    a2 = spectral_loop_area(pbc_spectrum(lossy(), 2048))
    assert np.allclose(a1, a2, atol=1e-6)


def test_loop_area_against_winding_pixel_count():
    # area of {E : winding != 0} by counting pixels, an independent route
    im = np.linspace(-0.1, 0.0, 121)
    re = np.linspace(-math.pi, math.pi, 1200, endpoint=False)
    grid = re[None, :] + 1j * im[:, None]
    w = det_winding(THETA45, 0.1, grid, k_samples=256)
    cell = (re[1] - re[0]) * (im[1] - im[0])
    pixel_area = np.count_nonzero(w) * cell
    total = sum(spectral_loop_area(pbc_spectrum(lossy(), 1024)))
    assert pixel_area == pytest.approx(total, rel=5e-3)


def test_loop_area_refuses_untracked():
    pbc = pbc_spectrum(lossy(), 64)
    bad = SpectrumResult("PBC", pbc.params, pbc.energies, pbc.eigenvalues, pbc.k, flagged=(5,),
                         closure=pbc.closure)
    with pytest.raises(BandTrackingError):
        spectral_loop_area(bad)


# -- dense matrix and OBC -----------------------------------------------------

def test_dense_matrix_needs_finite_lattice():
    with pytest.raises(ValidationError):
        dense_walk_matrix(lossy())


@pytest.mark.parametrize("gamma", [0.0, 0.1])
def test_dense_matches_step_periodic(backend, rng, gamma):
    params = WalkParams(0.6, gamma, Boundary.periodic(10), normalize_each_step=False)
    U = dense_walk_matrix(params)
    for _ in range(100):
        amps = rng.normal(size=(10, 2)) + 1j * rng.normal(size=(10, 2))
        out = step(WalkState(0, amps), params)
        np.testing.assert_allclose(U @ amps.ravel(), out.amps.ravel(), atol=1e-12)


def test_dense_matches_step_open_interior(backend, rng):
    params = WalkParams(1.1, 0.3, Boundary.open(9), normalize_each_step=False)
    U = dense_walk_matrix(params)
    for _ in range(20):
        amps = rng.normal(size=(9, 2)) + 1j * rng.normal(size=(9, 2))
        amps[0] = amps[-1] = 0  # nothing reaches the edges in one step
        out = step(WalkState(0, amps), params)
        np.testing.assert_allclose(U @ amps.ravel(), out.amps.ravel(), atol=1e-12)


@pytest.mark.parametrize("boundary", [Boundary.periodic(8), Boundary.open(7)])
def test_lossless_dense_is_unitary(boundary):
    U = dense_walk_matrix(WalkParams(0.9, 0.0, boundary))
    np.testing.assert_allclose(U.conj().T @ U, np.eye(len(U)), atol=1e-12)


def test_periodic_block_structure():
    N = 6
    U = dense_walk_matrix(WalkParams(0.4, 0.2, Boundary.periodic(N)))
    for x in range(N):
        cols = U[:, 2 * x : 2 * x + 2]
        rows = set(np.flatnonzero(np.any(cols != 0, axis=1)))
        assert rows == {2 * ((x + 1) % N), 2 * ((x - 1) % N) + 1}
    assert np.all(np.count_nonzero(U, axis=0) == 2)
    assert np.all(np.count_nonzero(U, axis=1) == 2)


def test_bloch_dense_consistency(backend):
    N = 40
    obc_like = dense_walk_matrix(lossy(boundary=Boundary.periodic(N)))
    from nhqw.linalg import eig_dense

    w, V = eig_dense(obc_like)
    dense_E = quasienergy(w)
    pbc_E = pbc_spectrum(lossy(), N).flat_energies()
    # compare on the circle to avoid spurious branch-cut differences
    a, b = list(np.exp(-1j * pbc_E)), list(np.exp(-1j * dense_E))
    for z in a:
        j = int(np.argmin(np.abs(np.array(b) - z)))
        assert abs(b.pop(j) - z) < 1e-8


def test_lossless_obc(backend):
    obc = obc_spectrum(lossy(gamma=0.0, boundary=Boundary.open(50)))
    assert len(obc.energies) == 100
    np.testing.assert_allclose(np.abs(obc.eigenvalues), 1.0, atol=1e-8)
    assert np.max(np.abs(obc.energies.imag)) <= 1e-8


def test_lossy_obc_uniform_decay(backend):
    obc = obc_spectrum(lossy(boundary=Boundary.open(50)))
    np.testing.assert_allclose(obc.energies.imag, -0.05, atol=1e-8)


def test_obc_rejects_other_boundaries():
    with pytest.raises(ValidationError):
        obc_spectrum(lossy(boundary=Boundary.periodic(10)))
    with pytest.raises(ValidationError):
        obc_spectrum(lossy(boundary=Boundary.open(501)))


# -- winding --------------------------------------------------------------------

def test_obc_inside_pbc_loops(backend):
    pbc = pbc_spectrum(lossy(), 1024)
    obc = obc_spectrum(lossy(boundary=Boundary.open(50)))
    windings = [point_gap_winding(pbc, E) for E in obc.energies]
    assert all(w != 0 for w in windings)
    # independent route: argument principle on the characteristic polynomial
    np.testing.assert_array_equal(windings, det_winding(THETA45, 0.1, obc.energies))


@pytest.mark.parametrize("E0", [10.0, 10j, -10j, -10 + 10j])
def test_far_points_do_not_wind(E0):
    assert point_gap_winding(pbc_spectrum(lossy(), 512), E0) == 0


def test_lossless_curve_has_no_interior():
    pbc = pbc_spectrum(lossy(gamma=0.0), 512)
    for E0 in [0.3 + 0.2j, -1.0 - 0.05j, 2.5 + 1e-3j]:
        assert point_gap_winding(pbc, E0) == 0


def test_winding_on_curve_is_an_error():
    pbc = pbc_spectrum(lossy(), 512)
    with pytest.raises(NumericalError):
        point_gap_winding(pbc, pbc.energies[0, 100])
    assert curve_distance(pbc, pbc.energies[0, 100]) < 1e-12


# -- edge localization -----------------------------------------------------------

def test_edge_mass_examples():
    assert edge_mass(np.full(100, 0.01), 0.1) == pytest.approx(0.10)
    delta = np.zeros(30)
    delta[-1] = 1
    assert edge_mass(delta) == 1.0
    assert dominant_edge(delta) == "right"
    assert dominant_edge(delta[::-1]) == "left"
    with pytest.raises(ValidationError):
        edge_mass(delta, 0.0)


def test_skin_modes_pile_up_on_the_right(backend):
    obc = obc_spectrum(lossy(boundary=Boundary.open(50)), with_states=True)
    np.testing.assert_allclose(obc.profiles.sum(axis=1), 1.0, atol=1e-12)
    sides = [dominant_edge(p) for p in obc.profiles]
    assert sides.count("right") == len(sides)
