import numpy as np
import pytest

from superrad import (
    CouplingSet,
    DriveSpec,
    SizeLimitError,
    build_coupling,
    emission_wavevector,
    evolve,
    line_lattice,
)
from superrad.oracle import (
    _BitIndex,
    emission_rate,
    excited_populations,
    lindblad_rhs,
    product_state,
    rate_derivative,
    slope_check,
)

from conftest import random_cloud


class TestProductState:
    def test_fully_inverted(self):
        drive = DriveSpec.fully_inverted()
        rho = product_state(3, drive, np.zeros((3, 3)) + np.arange(3)[:, None])
        assert rho[7, 7] == pytest.approx(1.0, abs=1e-14)
        assert np.trace(rho) == pytest.approx(1.0, abs=1e-14)

    def test_ground(self):
        rho = product_state(2, DriveSpec(alpha=0.0), np.zeros((2, 3)))
        assert rho[0, 0] == pytest.approx(1.0, abs=1e-14)

    def test_half_excited_population(self):
        rho = product_state(1, DriveSpec(alpha=np.pi / 2), np.zeros((1, 3)))
        assert excited_populations(rho, 1)[0] == pytest.approx(0.5, abs=1e-14)

    def test_populations_match_formula(self):
        alpha = 2.2
        pos = np.random.default_rng(0).uniform(0, 1, (4, 3))
        rho = product_state(4, DriveSpec(alpha=alpha), pos)
        expected = (1 - np.cos(alpha)) / 2
        assert np.allclose(excited_populations(rho, 4), expected, atol=1e-13)

    def test_size_cap(self):
        with pytest.raises(SizeLimitError):
            product_state(9, DriveSpec.fully_inverted(), np.zeros((9, 3)))


class TestLindbladRHS:
    def test_single_atom_decay(self):
        cloud = line_lattice(1, 1.0)
        coupling = build_coupling(cloud)
        rho = product_state(1, DriveSpec.fully_inverted(), cloud.positions)
        drho = lindblad_rhs(rho, coupling)
        # d<e>/dt = -Gamma at full excitation
        assert drho[1, 1].real == pytest.approx(-1.0, abs=1e-14)
        assert abs(np.trace(drho)) < 1e-14

    def test_traceless_random_state(self):
        cloud = random_cloud(3, seed=1)
        coupling = build_coupling(cloud)
        rng = np.random.default_rng(4)
        m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        rho = m @ m.conj().T
        rho /= np.trace(rho).real
        drho = lindblad_rhs(rho, coupling)
        assert abs(np.trace(drho)) < 1e-12
        assert np.max(np.abs(drho - drho.conj().T)) < 1e-12

    def test_two_atom_dicke_symmetric_state(self):
        # Gamma_12 = Gamma makes the symmetric one-excitation state decay at 2 Gamma
        coupling = CouplingSet.dicke(2)
        psi = np.zeros(4, dtype=complex)
        psi[1] = psi[2] = 1.0 / np.sqrt(2.0)
        rho = np.outer(psi, psi.conj())
        drho = lindblad_rhs(rho, coupling)
        excitation_rate = np.real(drho[1, 1] + drho[2, 2] + 2 * drho[3, 3])
        assert excitation_rate == pytest.approx(-2.0, abs=1e-13)
        assert emission_rate(rho, coupling) == pytest.approx(2.0, abs=1e-13)

    def test_dimension_mismatch(self):
        coupling = CouplingSet.dicke(2)
        with pytest.raises(ValueError):
            lindblad_rhs(np.eye(8, dtype=complex), coupling)


class TestEvolve:
    def test_single_atom_exponential(self):
        cloud = line_lattice(1, 1.0)
        coupling = build_coupling(cloud)
        rho0 = product_state(1, DriveSpec.fully_inverted(), cloud.positions)
        traj = evolve(rho0, coupling, cloud.positions, t_end=3.0, dt=1e-3)
        assert np.allclose(traj.gamma_total, np.exp(-traj.times), atol=1e-9)

    def test_far_separated_pair(self):
        cloud = line_lattice(2, 50.0)
        coupling = build_coupling(cloud)
        rho0 = product_state(2, DriveSpec.fully_inverted(), cloud.positions)
        traj = evolve(rho0, coupling, cloud.positions, t_end=2.0, dt=1e-3)
        assert np.allclose(traj.gamma_total, 2.0 * np.exp(-traj.times), atol=1e-3)

    def test_rate_nonnegative_and_directional_sampled(self):
        cloud = random_cloud(3, seed=8)
        coupling = build_coupling(cloud)
        rho0 = product_state(3, DriveSpec(alpha=2.0), cloud.positions)
        kf = emission_wavevector(0.3)
        traj = evolve(rho0, coupling, cloud.positions, t_end=1.0, dt=1e-3,
                      k_f=kf)
        assert np.all(traj.gamma_total >= -1e-10)
        assert traj.gamma_directional is not None
        assert traj.gamma_directional.shape == traj.times.shape

    def test_initial_rate_is_n_gamma(self):
        cloud = random_cloud(4, seed=3)
        coupling = build_coupling(cloud)
        rho0 = product_state(4, DriveSpec.fully_inverted(), cloud.positions)
        traj = evolve(rho0, coupling, cloud.positions, t_end=0.01, dt=1e-3)
        assert traj.gamma_total[0] == pytest.approx(4.0, abs=1e-12)


class TestSlopeCheck:
    def test_pair_fully_inverted_total(self):
        cloud = line_lattice(2, 0.4)
        res = slope_check(cloud, DriveSpec.fully_inverted())
        assert res["rel_diff"] < 1e-6

    def test_three_atom_partial_total(self):
        cloud = random_cloud(3, seed=42, box=0.7)
        drive = DriveSpec(alpha=2 * np.pi / 3, k_i=[0.3, -0.8, 0.52])
        res = slope_check(cloud, drive)
        assert res["rel_diff"] < 1e-4

    def test_three_atom_directional(self):
        cloud = random_cloud(3, seed=5, box=0.7)
        res = slope_check(cloud, DriveSpec.fully_inverted(),
                          k_f=emission_wavevector(0.25))
        assert res["rel_diff"] < 1e-4

    def test_second_derivative_total(self):
        cloud = random_cloud(3, seed=13, box=0.7)
        res = slope_check(cloud, DriveSpec.fully_inverted(), order=2)
        assert res["rel_diff"] < 1e-3

    def test_second_derivative_requires_full_inversion(self):
        cloud = random_cloud(2, seed=1)
        with pytest.raises(ValueError):
            slope_check(cloud, DriveSpec(alpha=1.0), order=2)

    def test_halving_h_converges(self):
        # formula-consistent derivative: smaller stencil cannot degrade badly
        cloud = random_cloud(3, seed=77, box=0.7)
        drive = DriveSpec(alpha=2.4, k_i=[0.0, 0.6, 0.8])
        coarse = slope_check(cloud, drive, h=0.04)
        fine = slope_check(cloud, drive, h=0.02)
        assert fine["rel_diff"] < 10 * coarse["rel_diff"] + 1e-9
        assert fine["rel_diff"] < 1e-5


def test_bit_index_pair_maps_roundtrip():
    ix = _BitIndex(3)
    dst, src = ix.pair_maps(0, 2)  # sigma^+_2 sigma^-_0
    for d, s in zip(dst, src):
        assert (d >> 2) & 1 == 1 and (d >> 0) & 1 == 0
        assert s == d - 4 + 1


def test_rate_derivative_matches_formula_scale():
    cloud = line_lattice(2, 0.31)
    coupling = build_coupling(cloud)
    got = rate_derivative(cloud, DriveSpec.fully_inverted())
    expected = -2.0 * 2.0 + float(np.sum(coupling.gamma**2))
    assert got == pytest.approx(expected, rel=1e-7)
