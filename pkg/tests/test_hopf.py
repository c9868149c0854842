import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fplap as fp
from fplap.hopf import RegionSet

PAR = fp.FracParams(2, 0.5, 3.0)


class TestReflect:
    def test_examples(self):
        assert np.allclose(fp.reflect([3.0, 1.0], 0.0), [-3.0, 1.0])
        assert np.allclose(fp.reflect([0.0, 2.0], 0.0), [0.0, 2.0])

    @given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-5, 5))
    @settings(max_examples=100, deadline=None)
    def test_involution(self, x1, x2, lam):
        x = np.array([x1, x2])
        assert np.allclose(fp.reflect(fp.reflect(x, lam), lam), x)

    def test_batch_shape(self):
        pts = np.arange(6.0).reshape(3, 2)
        out = fp.reflect(pts, 1.0)
        assert out.shape == (3, 2)
        assert np.allclose(out[:, 1], pts[:, 1])


class TestReflectionDifference:
    def test_even_field_gives_zero(self):
        even = fp.gaussian_mixture_field(2, [[0.0, 0.4]], [0.8], [1.0])
        w = fp.w_lambda(even, 0.0)
        rng = np.random.default_rng(2)
        pts = rng.normal(size=(200, 2))
        assert np.max(np.abs(w(pts))) < 1e-15

    def test_linear_field(self):
        lin = fp.ScalarField(lambda pts: pts[:, 0], dim=2, smoothness_radius=1e6,
                             tail=fp.TailModel(1.0, 1.0, 1.0))
        w = fp.w_lambda(lin, 0.0)
        pts = np.array([[0.7, 0.2], [-0.3, 1.0]])
        assert np.allclose(w(pts), -2.0 * pts[:, 0])

    def test_antisymmetry_exact(self):
        u = fp.monotone_test_field(2)
        w = fp.w_lambda(u, 0.0)
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(10000, 2)) * 2.0
        assert np.max(np.abs(w(pts) + w(fp.reflect(pts, 0.0)))) == 0.0

    def test_antisymmetry_with_shifted_plane(self):
        u = fp.monotone_test_field(2)
        w = fp.w_lambda(u, 0.7)
        rng = np.random.default_rng(4)
        pts = rng.normal(size=(500, 2))
        assert np.max(np.abs(w(pts) + w(fp.reflect(pts, 0.7)))) < 1e-14


class TestRegions:
    def test_invariants_randomized(self):
        rng = np.random.default_rng(5)
        for delta, eta, R in [(0.01, 0.1, 50.0), (0.06, 0.1, 50.0), (0.03, 0.5, 3.0)]:
            rs = RegionSet(delta=delta, eta=eta, R=R)
            geom = rs.check_geometry(rng)
            assert all(geom.values()), (delta, eta, R, geom)

    def test_overlapping_probe_box_still_disjoint(self):
        # 2*delta > eta: the probe box pokes into the large region; the
        # disjointness of the box and frame regions is definitional
        rs = RegionSet(delta=0.0625, eta=0.1, R=50.0)
        geom = rs.check_geometry(np.random.default_rng(6))
        assert geom["d3_d4_disjoint"] and geom["covers_half_ball"]

    def test_parameter_order_enforced(self):
        with pytest.raises(ValueError):
            RegionSet(delta=0.2, eta=0.1, R=50.0)
        with pytest.raises(ValueError):
            RegionSet(delta=0.01, eta=0.1, R=1.5)  # unit box outside the ball

    def test_kernel_difference_positivity(self):
        # |xb - y| <= |xb - y0| whenever both points sit in the half-space
        rng = np.random.default_rng(7)
        xb = np.array([0.05, 0.0])
        y = np.abs(rng.normal(size=(5000, 2))) * [2.0, 1.0]
        y0 = fp.reflect(y, 0.0)
        assert np.all(np.linalg.norm(xb - y, axis=1) <= np.linalg.norm(xb - y0, axis=1) + 1e-15)


class TestSplit:
    def test_even_field_everything_vanishes(self):
        even = fp.gaussian_mixture_field(2, [[0.0, 0.4]], [0.8], [1.0])
        setup = fp.HalfSpaceSetup(params=PAR, u=even)
        rs = RegionSet(delta=0.03125, eta=0.1, R=50.0)
        rep = fp.split_I_II(setup, [0.03125, 0.0], rs)
        assert abs(rep.I_total) < 1e-9
        assert abs(rep.II_total) < 1e-9

    def test_flattened_field_consistency_and_signs(self):
        setup = fp.HalfSpaceSetup(params=PAR, u=fp.flattened_test_field(2))
        rs = RegionSet(delta=0.03125, eta=0.1, R=50.0)
        rep = fp.split_I_II(setup, [0.03125, 0.0], rs)
        assert rep.consistency_ok
        assert rep.I_total < 0.0
        assert rep.D1_diagnostic < 0.0  # window where the difference is largest

    def test_plane_shift_covariance(self):
        # reflecting a translated field across the translated plane reproduces
        # the original split exactly
        base = fp.flattened_test_field(2)
        shifted = fp.translate_field(base, [0.4, 0.0])
        d = 0.03125
        rep0 = fp.split_I_II(fp.HalfSpaceSetup(params=PAR, u=base),
                             [d, 0.0], RegionSet(delta=d, eta=0.1, R=50.0))
        rep1 = fp.split_I_II(fp.HalfSpaceSetup(params=PAR, u=shifted, lam=0.4),
                             [0.4 + d, 0.0], RegionSet(delta=d, eta=0.1, R=50.0))
        assert rep1.I_total == pytest.approx(rep0.I_total, rel=1e-9)
        assert rep1.II_total == pytest.approx(rep0.II_total, rel=1e-9)

    def test_probe_must_sit_on_axis(self):
        setup = fp.HalfSpaceSetup(params=PAR, u=fp.flattened_test_field(2))
        rs = RegionSet(delta=0.03125, eta=0.1, R=50.0)
        with pytest.raises(ValueError):
            fp.split_I_II(setup, [0.03125, 0.01], rs)

    def test_exponent_guard(self):
        with pytest.raises(ValueError):
            fp.HalfSpaceSetup(params=fp.FracParams(2, 0.5, 2.5),
                              u=fp.flattened_test_field(2))

    def test_only_planar_case_implemented(self):
        par3 = fp.FracParams(3, 0.5, 3.0)
        setup = fp.HalfSpaceSetup(params=par3, u=fp.flattened_test_field(3))
        rs = RegionSet(delta=0.03125, eta=0.1, R=50.0)
        with pytest.raises(NotImplementedError):
            fp.split_I_II(setup, [0.03125, 0.0, 0.0], rs)


class TestScan:
    def test_flattened_scaling(self):
        setup = fp.HalfSpaceSetup(params=PAR, u=fp.flattened_test_field(2))
        scan = fp.delta_scaling_scan(setup, [2.0**-4, 2.0**-5, 2.0**-6, 2.0**-7])
        assert all(scan.consistency_ok)
        assert scan.I_all_negative and scan.c_fit > 0.0
        assert scan.slope_II > 1.8
        assert scan.combined_ok
        # the induced coefficient violates the decay hypothesis by design
        assert not scan.theorem_conforming
        assert not scan.degenerate

    def test_monotone_field_passes_gate(self):
        setup = fp.HalfSpaceSetup(params=PAR, u=fp.monotone_test_field(2))
        scan = fp.delta_scaling_scan(setup, [2.0**-4, 2.0**-5, 2.0**-6])
        assert scan.theorem_conforming
        assert scan.gate_slope == pytest.approx(2.0, abs=0.2)

    def test_even_field_reports_degenerate(self):
        even = fp.gaussian_mixture_field(2, [[0.0, 0.4]], [0.8], [1.0])
        setup = fp.HalfSpaceSetup(params=PAR, u=even)
        scan = fp.delta_scaling_scan(setup, [2.0**-4, 2.0**-5])
        assert scan.degenerate
        assert not scan.theorem_conforming

    def test_sequence_validation(self):
        setup = fp.HalfSpaceSetup(params=PAR, u=fp.flattened_test_field(2))
        with pytest.raises(ValueError):
            fp.delta_scaling_scan(setup, [0.01, 0.02])
        with pytest.raises(ValueError):
            fp.delta_scaling_scan(setup, [0.2, 0.1], eta=0.1)


class TestNormalDerivative:
    def test_linear_profile(self):
        w = fp.ScalarField(lambda pts: pts[:, 0] - 0.0, dim=2, smoothness_radius=1e6,
                           tail=fp.TailModel(1.0, 1.0, 1.0))
        assert fp.normal_derivative(w, [0.0, 0.3]) == pytest.approx(-1.0, abs=1e-12)

    def test_tanh_profile(self):
        w = fp.ScalarField(lambda pts: np.tanh(pts[:, 0]), dim=2, smoothness_radius=1e6,
                           tail=fp.TailModel(1.0, 0.0, 1.0))
        assert fp.normal_derivative(w, [0.0, 0.0], h=1e-2) == pytest.approx(-1.0, abs=1e-4)

    def test_pinned_monotone_field_strictly_negative(self):
        w = fp.w_lambda(fp.monotone_test_field(2), 0.0)
        for b2 in np.linspace(-1.5, 1.5, 7):
            assert fp.normal_derivative(w, [0.0, b2]) < 0.0

    def test_step_validation(self):
        w = fp.w_lambda(fp.monotone_test_field(2), 0.0)
        with pytest.raises(ValueError):
            fp.normal_derivative(w, [0.0, 0.0], h=0.0)
