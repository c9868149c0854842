import numpy as np
import pytest
from scipy import integrate

import fplap as fp
from fplap.special import angular_factor, angular_factor_closed, sphere_area

GRID_SP = [(0.3, 3.0), (0.3, 4.0), (0.5, 3.0), (0.5, 4.0), (0.7, 3.0), (0.7, 4.0)]

# frozen 30-digit tanh-sinh values of the defining integral (independent route)
FROZEN = {
    (0.5, 3.0, 0.45): 0.279341182966220009,
    (0.5, 3.0, 0.25): 2.0 / 3.0,  # the damping exponent vanishes here
    (0.3, 4.0, 0.18): 0.792180735828988471,
    (0.7, 3.0, 0.63): 0.283416380094525151,
}


def brute_force_c_nu(s, p, nu):
    """Composite QUADPACK quadrature of the raw two-sided integral.

    Pairs z = 1 +/- h symmetrically around the kernel singularity; closes
    the paired cascade below 1e-10 and the far tail with power models.
    """
    ps = p * s

    def spow(t):
        return np.sign(t) * np.abs(t) ** (p - 1.0)

    def paired(h):
        up = -np.expm1(nu * np.log1p(h))
        dn = -np.expm1(nu * np.log1p(-h))
        return (spow(up) + spow(dn)) * h ** (-1.0 - ps)

    h0 = 1.0e-10
    total = 0.0
    for lo, hi in [(h0, 1e-4), (1e-4, 0.5), (0.5, 1.0)]:
        v, _ = integrate.quad(paired, lo, hi, limit=500)
        total += v
    total += paired(h0) * h0 / (p - ps)

    v, _ = integrate.quad(lambda t: (1.0 + t) ** (-1.0 - ps), 0.0, np.inf)
    total += v

    def right_folded(w):
        # z = 1/w maps (2, inf) onto (0, 1/2); jacobian 1/w^2
        z = 1.0 / w
        return spow(-np.expm1(nu * np.log(z))) * (z - 1.0) ** (-1.0 - ps) / w**2

    v, _ = integrate.quad(right_folded, 0.0, 0.5, limit=500)
    total += v
    return total


class TestCnu:
    def test_left_tail_is_exact(self):
        for s, p in GRID_SP:
            assert fp.left_tail_term(s, p) == 1.0 / (p * s)

    def test_limit_of_vanishing_exponent(self):
        # as nu -> 0+ only the left tail survives
        assert fp.c_nu(0.5, 3.0, 1e-7) == pytest.approx(2.0 / 3.0, abs=1e-4)

    @pytest.mark.parametrize("key", sorted(FROZEN))
    def test_frozen_values(self, key):
        s, p, nu = key
        assert fp.c_nu(s, p, nu) == pytest.approx(FROZEN[key], rel=1e-9)

    def test_brute_force_oracle_agrees(self):
        s, p, nu = 0.5, 3.0, 0.45
        oracle = brute_force_c_nu(s, p, nu)
        assert oracle == pytest.approx(FROZEN[(s, p, nu)], rel=1e-7)
        assert fp.c_nu(s, p, nu) == pytest.approx(oracle, rel=1e-6)

    def test_degenerate_exponent_vanishes(self):
        for s, p in GRID_SP:
            assert abs(fp.c_nu(s, p, s)) < 1e-6

    def test_positive_below_degenerate_exponent(self):
        for s, p in GRID_SP:
            for frac in (0.3, 0.6, 0.9):
                assert fp.c_nu(s, p, frac * s) > 0.0
            thr = (p * s - 1.0) / (p - 1.0)
            if 0.0 < thr < s:
                assert fp.c_nu(s, p, 0.5 * thr) > 0.0
                assert fp.c_nu(s, p, 0.5 * (thr + s)) > 0.0

    def test_threshold_value_and_continuity(self):
        s, p = 0.5, 3.0
        thr = (p * s - 1.0) / (p - 1.0)
        assert fp.c_nu(s, p, thr) == pytest.approx(1.0 / (p * s), rel=1e-12)
        below = fp.c_nu(s, p, thr - 1e-8)
        above = fp.c_nu(s, p, thr + 1e-8)
        assert abs(below - above) < 1e-6

    @pytest.mark.parametrize("s,p,nu", [(0.5, 3.0, 0.15), (0.5, 3.0, 0.45),
                                        (0.7, 3.0, 0.63), (0.3, 4.0, 0.27)])
    def test_representations_agree(self, s, p, nu):
        folded = fp.c_nu(s, p, nu, method="folded")
        subtracted = fp.c_nu(s, p, nu, method="subtracted")
        raw = fp.c_nu(s, p, nu, method="raw-pv")
        assert subtracted == pytest.approx(folded, rel=1e-6)
        assert raw == pytest.approx(folded, rel=1e-6)

    def test_domain_guards(self):
        with pytest.raises(ValueError):
            fp.c_nu(0.5, 3.0, 0.6)  # nu > s
        with pytest.raises(ValueError):
            fp.c_nu(0.5, 3.0, 0.0)
        with pytest.raises(ValueError):
            fp.c_nu(0.5, 3.0, 0.25, method="bogus")


class TestAngular:
    def test_closed_form_n3(self):
        # exact antiderivative: 1/(1+ps)
        assert angular_factor(3, 1.5) == pytest.approx(1.0 / 2.5, abs=1e-12)

    def test_quad_matches_beta_form(self):
        for n, ps in [(2, 1.5), (3, 1.5), (4, 1.5), (2, 1.2)]:
            assert angular_factor(n, ps) == pytest.approx(angular_factor_closed(n, ps), rel=1e-10)

    def test_frozen_values(self):
        assert angular_factor(2, 1.5) == pytest.approx(0.874019184764039937, rel=1e-10)
        assert angular_factor(4, 1.5) == pytest.approx(0.249719767075439982, rel=1e-10)

    def test_sphere_areas(self):
        assert sphere_area(0) == pytest.approx(2.0)
        assert sphere_area(1) == pytest.approx(2.0 * np.pi)
        assert sphere_area(2) == pytest.approx(4.0 * np.pi)


class TestCnuN:
    def test_consistency_identity_exact(self):
        eig = fp.c_nu_n(0.5, 3.0, 0.25, 3)
        assert eig.c_nu_n == pytest.approx(
            eig.c_nu * eig.angular_factor * eig.sphere_area_factor, rel=1e-14
        )

    def test_n2_brute_force(self):
        s, p, nu = 0.5, 3.0, 0.25
        ang, _ = integrate.quad(lambda t: (1.0 + t * t) ** (-(2.0 + p * s) / 2.0), 0, np.inf)
        oracle = brute_force_c_nu(s, p, nu) * 2.0 * ang
        eig = fp.c_nu_n(s, p, nu, 2)
        assert eig.c_nu_n > 0.0
        assert eig.c_nu_n == pytest.approx(oracle, rel=1e-6)

    def test_requires_n_at_least_2(self):
        with pytest.raises(ValueError):
            fp.c_nu_n(0.5, 3.0, 0.25, 1)


class TestVerifyEigen:
    def test_1d_probes(self):
        params = fp.FracParams(1, 0.5, 3.0)
        report = fp.verify_halfspace_eigen(params, 0.25, [0.5, 1.0, 2.0])
        assert report.max_rel_deviation < 1e-3
        assert not report.degenerate

    def test_degenerate_uses_absolute_deviation(self):
        params = fp.FracParams(1, 0.5, 3.0)
        report = fp.verify_halfspace_eigen(params, 0.5, [1.0])
        assert report.degenerate
        assert max(report.abs_deviation) < 1e-4

    def test_closed_form_homogeneity_between_probes(self):
        params = fp.FracParams(1, 0.5, 3.0)
        report = fp.verify_halfspace_eigen(params, 0.25, [1.0, 2.0])
        expo = (params.p - 1.0) * 0.25 - params.ps
        lhs = report.closed_form_values[1]
        rhs = report.closed_form_values[0] * 2.0**expo
        assert lhs == pytest.approx(rhs, rel=1e-14)

    def test_rejects_bad_probe_or_exponent(self):
        params = fp.FracParams(1, 0.5, 3.0)
        with pytest.raises(ValueError):
            fp.verify_halfspace_eigen(params, 0.25, [-1.0])
        with pytest.raises(ValueError):
            fp.verify_halfspace_eigen(params, 0.7, [1.0])
