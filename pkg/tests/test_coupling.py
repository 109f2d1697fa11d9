import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import spherical_jn, spherical_yn

from superrad import (
    CouplingSet,
    MultilevelChannel,
    SingularKernelError,
    bessel_j0,
    bessel_j2,
    build_coupling,
    green_function,
    hankel_h0,
    hankel_h2,
    line_lattice,
    multilevel_decay_element,
)
from superrad.coupling import TWO_PI, green_many, multilevel_tensor

from conftest import random_cloud

Z = np.array([0.0, 0.0, 1.0])


class TestSpecialFunctions:
    def test_h0_at_pi(self):
        # closed form e^{i s}/(i s) at s = pi is purely imaginary, i/pi
        val = hankel_h0(np.pi)
        assert val.real == pytest.approx(0.0, abs=1e-16)
        assert val.imag == pytest.approx(1.0 / np.pi, rel=1e-15)

    def test_h2_at_one_product_form(self):
        # (-3i - 3 + i) e^{i} = (-3 - 2i) e^{i}, frozen from the product form
        expected = (-3.0 - 2.0j) * np.exp(1.0j)
        assert hankel_h2(1.0) == pytest.approx(expected, rel=1e-13)

    def test_bessel_limits(self):
        assert bessel_j0(0.0) == 1.0
        assert bessel_j2(0.0) == 0.0

    def test_real_parts_match_bessel_bitwise(self):
        s = np.linspace(0.05, 20.0, 301)
        assert np.all(hankel_h0(s).real == bessel_j0(s))
        assert np.all(hankel_h2(s).real == bessel_j2(s))

    @pytest.mark.parametrize("s", [0.3, 1.0, 2.0, np.pi, 7.7, 40.0])
    def test_against_scipy(self, s):
        assert bessel_j0(s) == pytest.approx(spherical_jn(0, s), rel=1e-12)
        assert bessel_j2(s) == pytest.approx(spherical_jn(2, s), rel=1e-10, abs=1e-13)
        assert hankel_h0(s).imag == pytest.approx(spherical_yn(0, s), rel=1e-12)
        assert hankel_h2(s).imag == pytest.approx(spherical_yn(2, s), rel=1e-10, abs=1e-13)

    def test_small_argument_absolute_accuracy(self):
        # closed form loses relative precision below s ~ 1e-4 but stays
        # absolutely small; scipy is the reference
        for s in (1e-3, 1e-4):
            assert abs(bessel_j2(s) - spherical_jn(2, s)) < 1e-6

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            hankel_h0(0.0)
        with pytest.raises(ValueError):
            hankel_h0(-1.0)
        with pytest.raises(SingularKernelError):
            hankel_h2(1e-9)
        with pytest.raises(ValueError):
            bessel_j0(-0.1)


class TestGreenFunction:
    def test_z_axis_half_wavelength(self):
        # on the dipole axis the angular factor is 1: g = (h0 + h2)/2 at s = pi
        g = green_function([0.0, 0.0, 0.5], Z)
        expected = 0.5 * (hankel_h0(np.pi) + hankel_h2(np.pi))
        assert g == pytest.approx(expected, rel=1e-14)

    def test_magic_angle_kills_h2(self):
        # cos(theta) = 1/sqrt(3) zeroes the quadrupole coefficient
        r = 0.73
        ct = 1.0 / np.sqrt(3.0)
        stheta = np.sqrt(1.0 - ct**2)
        g = green_function([r * stheta, 0.0, r * ct], Z)
        assert g == pytest.approx(0.5 * hankel_h0(TWO_PI * r), rel=1e-12)

    def test_dicke_limit(self):
        # 2 Re g -> Gamma with an O(s^2) deficit from the kernel expansion
        for d in (1e-2, 1e-3):
            g = green_function([0.0, d, 0.0], Z)
            assert 2.0 * g.real == pytest.approx(1.0, abs=0.25 * (TWO_PI * d) ** 2)

    def test_circular_transition_coefficient(self):
        # delta_m = +-1 flips and halves the quadrupole weight
        rvec = np.array([0.3, 0.2, 0.4])
        s = TWO_PI * np.linalg.norm(rvec)
        mu = rvec[2] / np.linalg.norm(rvec)
        a = 0.5 * (3 * mu * mu - 1)
        expected = 0.5 * (hankel_h0(s) + (-0.5 * a) * hankel_h2(s))
        assert green_function(rvec, Z, delta_m=1) == pytest.approx(expected, rel=1e-13)

    def test_zero_displacement_raises(self):
        with pytest.raises(SingularKernelError):
            green_function([0.0, 0.0, 0.0], Z)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-2.0, 2.0), min_size=3, max_size=3),
           st.booleans())
    def test_reciprocity(self, rvec, circ):
        rvec = np.asarray(rvec)
        if np.linalg.norm(rvec) < 1e-3:
            return
        dm = 1 if circ else 0
        assert green_function(rvec, Z, delta_m=dm) == pytest.approx(
            green_function(-rvec, Z, delta_m=dm), rel=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-3.0, 3.0), min_size=3, max_size=3),
           st.floats(0.25, 4.0))
    def test_wavelength_rescale_invariance(self, rvec, scale):
        # g depends on geometry only through k R
        rvec = np.asarray(rvec)
        if np.linalg.norm(rvec) < 1e-3:
            return
        g1 = green_function(rvec, Z)
        g2 = green_function(rvec * scale, Z, k=TWO_PI / scale)
        assert g2 == pytest.approx(g1, rel=1e-12)


class TestCouplingSet:
    def test_single_atom(self):
        c = build_coupling(line_lattice(1, 1.0))
        assert c.gamma.shape == (1, 1)
        assert c.gamma[0, 0] == 1.0
        assert c.omega[0, 0] == 0.0

    def test_pair_symmetry_exact(self):
        c = build_coupling(line_lattice(2, 0.37))
        assert np.max(np.abs(c.gamma - c.gamma.T)) == 0.0
        assert np.max(np.abs(c.omega - c.omega.T)) == 0.0

    def test_matches_scalar_kernel(self):
        cloud = random_cloud(6, seed=11)
        c = build_coupling(cloud)
        for i in range(6):
            for j in range(i + 1, 6):
                g = green_function(cloud.positions[i] - cloud.positions[j], Z)
                assert c.gamma[i, j] == pytest.approx(2.0 * g.real, rel=1e-14)
                assert c.omega[i, j] == pytest.approx(g.imag, rel=1e-14)

    def test_diagonal_convention(self):
        c = build_coupling(random_cloud(5, seed=3))
        assert np.all(np.diag(c.gamma) == 1.0)
        assert np.all(np.diag(c.omega) == 0.0)
        assert np.all(np.diag(c.g) == 0.5)

    def test_offdiagonal_bounded_by_gamma(self):
        for seed in range(4):
            c = build_coupling(random_cloud(30, seed=seed))
            assert np.max(np.abs(c.gamma)) <= 1.0 + 1e-12

    @pytest.mark.parametrize("n", [20, 80, 200])
    def test_positive_semidefinite(self, n):
        c = build_coupling(random_cloud(n, seed=n, box=2.0, min_sep=0.02))
        assert np.min(np.linalg.eigvalsh(c.gamma)) >= -1e-10

    def test_gpm_definition(self):
        c = build_coupling(random_cloud(4, seed=9))
        assert np.allclose(c.g_plus, 0.5 * c.gamma + 1j * c.omega, atol=0)
        assert np.allclose(c.g_minus, 0.5 * c.gamma - 1j * c.omega, atol=0)

    def test_dicke_constructor(self):
        c = CouplingSet.dicke(5)
        assert np.all(c.gamma == 1.0)
        assert np.all(c.omega == 0.0)

    def test_coincident_atoms_raise(self):
        cloud = line_lattice(3, 0.4)
        cloud.positions[2] = cloud.positions[0] + 1e-10
        with pytest.raises(SingularKernelError):
            build_coupling(cloud)

    def test_translation_leaves_matrices(self):
        cloud = random_cloud(12, seed=21)
        c1 = build_coupling(cloud)
        c2 = build_coupling(cloud.translated([3.7, -1.2, 0.4]))
        assert np.allclose(c2.gamma, c1.gamma, rtol=0, atol=1e-11)
        assert np.allclose(c2.omega, c1.omega, rtol=0, atol=1e-11)


class TestMultilevel:
    def test_short_range_kronecker(self):
        ch = MultilevelChannel(gamma_f=1.0, k_f_mag=TWO_PI, convention="kronecker")
        tens = multilevel_tensor(np.array([[1e-4, 0.0, 0.0]]), ch)[0]
        assert np.allclose(tens, np.eye(3), atol=1e-4)

    def test_short_range_uniform(self):
        ch = MultilevelChannel(gamma_f=1.0, k_f_mag=TWO_PI, convention="uniform")
        tens = multilevel_tensor(np.array([[1e-4, 0.0, 0.0]]), ch)[0]
        assert np.allclose(tens, np.ones((3, 3)), atol=1e-4)

    def test_z_axis_zz_element(self):
        # along z with i = i' = z: gamma_f (j0 + j2) in both conventions
        ch = MultilevelChannel(gamma_f=0.7, k_f_mag=TWO_PI)
        r = [0.0, 0.0, 0.43]
        s = TWO_PI * 0.43
        expected = 0.7 * (bessel_j0(s) + bessel_j2(s))
        assert multilevel_decay_element(r, ch, "z", "z") == pytest.approx(expected, rel=1e-13)
        ch2 = MultilevelChannel(gamma_f=0.7, k_f_mag=TWO_PI, convention="kronecker")
        assert multilevel_decay_element(r, ch2, 2, 2) == pytest.approx(expected, rel=1e-13)

    def test_channel_wavenumber_scales_argument(self):
        ch = MultilevelChannel(gamma_f=1.0, k_f_mag=0.5 * TWO_PI)
        got = multilevel_decay_element([0.0, 0.0, 1.0], ch, "z", "z")
        expected = bessel_j0(np.pi) + bessel_j2(np.pi)
        assert got == pytest.approx(expected, rel=1e-13)

    def test_validation(self):
        with pytest.raises(ValueError):
            MultilevelChannel(gamma_f=0.0, k_f_mag=1.0)
        with pytest.raises(ValueError):
            MultilevelChannel(gamma_f=1.0, k_f_mag=-2.0)
        with pytest.raises(ValueError):
            MultilevelChannel(gamma_f=1.0, k_f_mag=1.0, convention="bogus")


def test_green_many_matches_scalar():
    rng = np.random.default_rng(5)
    rvecs = rng.uniform(-1.0, 1.0, (20, 3))
    rvecs = rvecs[np.linalg.norm(rvecs, axis=1) > 0.05]
    vals = green_many(rvecs, Z)
    for rv, v in zip(rvecs, vals):
        assert v == pytest.approx(green_function(rv, Z), rel=1e-14)
