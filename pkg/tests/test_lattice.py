import time

import numpy as np
import pytest

from superrad import (
    LatticeSpec,
    axis_weight,
    build_coupling,
    emission_wavevector,
    fit_scaling,
    infinite_chain_limit,
    scaled_slope_lattice,
    slope_directional_inverted,
    slope_directional_lattice,
    slope_total_inverted,
    slope_total_lattice,
    standard_spec,
    superradiance_threshold,
    weighted_displacement_kernel,
)


class TestWeights:
    def test_axis_weight_edges(self):
        n1 = 9
        assert axis_weight(0, n1) == 1.0
        assert axis_weight(n1, n1) == 0.0
        nu = np.arange(-(n1 - 1), n1)
        w = axis_weight(nu, n1)
        assert np.all(w > 0.0)
        assert np.array_equal(w, w[::-1])

    @pytest.mark.parametrize("dim,n1", [(1, 50), (2, 14), (3, 7), (1, 100), (2, 100)])
    def test_pair_count_conservation(self, dim, n1):
        spec = standard_spec(dim, 0.6, n1)
        wk = weighted_displacement_kernel(spec)
        n = n1**dim
        assert n * np.sum(wk.weights) == pytest.approx(n**2, rel=1e-13)
        assert wk.pair_count == pytest.approx(n**2, rel=1e-13)

    def test_kernel_origin_is_diagonal(self):
        wk = weighted_displacement_kernel(standard_spec(2, 0.5, 4))
        assert wk.gamma[3, 3] == 1.0  # nu = 0 entry
        assert wk.weights[3, 3] == 1.0


class TestFastNaiveEquivalence:
    def test_n1_one_any_dim(self):
        for dim in (1, 2, 3):
            spec = standard_spec(dim, 0.9, 1)
            assert scaled_slope_lattice(spec, "total") == pytest.approx(-1.0, rel=1e-14)
            kf = emission_wavevector(0.3)
            assert scaled_slope_lattice(spec, "directional", kf) == pytest.approx(-1.0, rel=1e-14)

    @pytest.mark.parametrize("dim,n1_cap", [(1, 500), (2, 40), (3, 12)])
    def test_randomised_suite(self, dim, n1_cap):
        rng = np.random.default_rng(100 + dim)
        for _ in range(4):
            d = rng.uniform(0.1, 2.5)
            n1 = int(rng.integers(2, n1_cap + 1))
            phi = rng.uniform(0.0, np.pi)
            spec = standard_spec(dim, d, n1)
            cloud = spec.to_cloud()
            coupling = build_coupling(cloud)
            kf = emission_wavevector(phi)
            naive_t = slope_total_inverted(coupling).scaled_slope
            naive_d = slope_directional_inverted(coupling, cloud, kf).scaled_slope
            fast_t = scaled_slope_lattice(spec, "total")
            fast_d = scaled_slope_lattice(spec, "directional", kf)
            assert fast_t == pytest.approx(naive_t, rel=1e-12)
            assert fast_d == pytest.approx(naive_d, rel=1e-12)

    def test_general_path_skew_lattice(self):
        # non-orthogonal axes force the full-grid path
        spec = LatticeSpec(dim=2, n1=6, a1=[0.62, 0.0, 0.0], a2=[0.31, 0.54, 0.0])
        cloud = spec.to_cloud()
        coupling = build_coupling(cloud)
        kf = emission_wavevector(0.77)
        assert scaled_slope_lattice(spec, "total") == pytest.approx(
            slope_total_inverted(coupling).scaled_slope, rel=1e-12)
        assert scaled_slope_lattice(spec, "directional", kf) == pytest.approx(
            slope_directional_inverted(coupling, cloud, kf).scaled_slope, rel=1e-12)

    def test_general_path_tilted_dipole(self):
        # dipole with projections on two axes also leaves the quadrant path
        spec = LatticeSpec(dim=2, n1=5, a1=[0.8, 0, 0], a2=[0, 0.8, 0],
                           dipole=np.array([1.0, 1.0, 1.0]) / np.sqrt(3))
        cloud = spec.to_cloud()
        coupling = build_coupling(cloud)
        assert scaled_slope_lattice(spec, "total") == pytest.approx(
            slope_total_inverted(coupling).scaled_slope, rel=1e-12)

    def test_square_40_point(self):
        # 1600-atom pairwise reference against the displacement sum
        spec = standard_spec(2, 0.6, 40)
        cloud = spec.to_cloud()
        naive = slope_total_inverted(build_coupling(cloud)).scaled_slope
        assert scaled_slope_lattice(spec, "total") == pytest.approx(naive, rel=1e-12)

    def test_result_objects(self):
        spec = standard_spec(3, 1.0, 14)
        res = slope_total_lattice(spec)
        assert res.n == 14**3
        assert res.superradiant  # cubic array turns superradiant at N1 = 14
        resd = slope_directional_lattice(standard_spec(2, 1.0, 6),
                                         emission_wavevector(0.0))
        assert resd.superradiant  # 36-atom square already directional


class TestChainLimit:
    def test_large_spacing_isolated_atoms(self):
        res = infinite_chain_limit(10.0, nu_max=5000)
        assert res.value == pytest.approx(-1.0, abs=1e-3)

    def test_tail_bound_self_consistent(self):
        a = infinite_chain_limit(0.2, nu_max=1000)
        b = infinite_chain_limit(0.2, nu_max=10000)
        assert abs(a.value - b.value) < a.tail_bound
        assert a.tail_bound < 3e-3

    def test_quarter_wavelength_near_zero(self):
        # the infinite-chain boundary sits essentially at d = lambda/4
        res = infinite_chain_limit(0.25, nu_max=200000)
        assert abs(res.value) <= 0.1
        assert res.value == pytest.approx(0.09999, abs=1e-3)

    def test_directional_flagged_conditional(self):
        res = infinite_chain_limit(0.5, kind="directional",
                                   k_f=emission_wavevector(0.4 * np.pi),
                                   nu_max=2000)
        assert res.conditionally_convergent
        assert res.tail_bound is None

    def test_matches_large_array(self):
        lim = infinite_chain_limit(0.3, nu_max=50000)
        finite = scaled_slope_lattice(standard_spec(1, 0.3, 4000), "total")
        assert finite == pytest.approx(lim.value, abs=5e-3)

    def test_validation(self):
        with pytest.raises(ValueError):
            infinite_chain_limit(0.5, nu_max=0)
        with pytest.raises(ValueError):
            infinite_chain_limit(0.5, kind="directional")


class TestScalingFits:
    def test_plane_reference_coefficients(self):
        fit = fit_scaling(2, 1.0)
        assert fit.slope == pytest.approx(0.1740, abs=0.010)
        assert fit.intercept == pytest.approx(-1.276, abs=0.05)

    def test_plane_double_spacing(self):
        fit = fit_scaling(2, 2.0)
        assert fit.slope == pytest.approx(0.0429, abs=0.005)

    def test_cube_reference_coefficients(self):
        fit = fit_scaling(3, 1.0)
        assert fit.slope == pytest.approx(0.0856, abs=0.005)
        assert fit.intercept == pytest.approx(-1.1913, abs=0.05)

    def test_cube_slope_quarter_rule(self):
        # doubling the spacing divides the linear coefficient by ~4
        d1 = fit_scaling(3, 1.0).slope
        d2 = fit_scaling(3, 2.0).slope
        assert d2 / d1 == pytest.approx(0.25, abs=0.03)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            fit_scaling(3, 1.0, n1_values=[6, 8, 10])

    def test_dim_one_rejected(self):
        with pytest.raises(ValueError):
            fit_scaling(1, 0.5)


class TestThreshold:
    def test_cube_unit_spacing(self):
        res = superradiance_threshold(3, 1.0)
        assert res.n1 == 14
        assert res.slope_at_threshold > 0.0

    def test_cube_double_spacing(self):
        assert superradiance_threshold(3, 2.0, n1_max=200).n1 == 51

    def test_plane_unit_spacing(self):
        res = superradiance_threshold(2, 1.0, n1_max=4000)
        assert res.n1 == pytest.approx(1530, rel=0.03)

    def test_not_found_carries_best(self):
        res = superradiance_threshold(2, 1.0, n1_max=100)
        assert res.n1 is None
        assert not res.found
        assert res.largest_slope < 0.0
        assert res.largest_slope_n1 == 100

    def test_monotone_cube_growth(self):
        # at unit spacing the cubic scaled slope increases with N1 >= 4
        slopes = [scaled_slope_lattice(standard_spec(3, 1.0, n1), "total")
                  for n1 in range(4, 22)]
        assert np.all(np.diff(slopes) > 0.0)

    def test_directional_onset_square(self):
        res = superradiance_threshold(2, 1.0, kind="directional",
                                      k_f=emission_wavevector(0.0), n1_max=50)
        assert res.n1 == 6


def test_fast_path_cost_scales_linearly():
    # wall time against atom count for the cubic total slope; the log-log
    # slope stays close to 1 (kernel evaluations scale with N)
    sizes = [22, 46, 100]
    times = []
    for n1 in sizes:
        spec = standard_spec(3, 1.0, n1)
        t0 = time.perf_counter()
        scaled_slope_lattice(spec, "total")
        times.append(time.perf_counter() - t0)
    atoms = np.array(sizes, dtype=float) ** 3
    exponent = np.polyfit(np.log(atoms), np.log(times), 1)[0]
    assert exponent < 1.2
