import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from fracfront import specfun
from fracfront.errors import ConvergenceError, DomainError, PoleError, RangeError

# Frozen with mpmath at 60 digits (direct series sums).
ML_TABLE = [
    ((0.5, 1.0, -2.0), 0.25539567631050574387),
    ((0.5, 1.0, 3.0), 16205.988853999586625),
    ((0.7, 1.3, 3.0), 108.62396909069916607),
    ((0.25, 1.0, -1.0), 0.46385276080171328694),
    ((0.8, 0.8, 2.5), 36.458059173367205205),
    ((0.3, 1.0, -4.0), 0.16650174431551664971),
    ((1.5, 1.0, -3.0), -0.17556537379997824292),
    ((0.9, 1.0, 12.0), 8212172.5207464223383),
    ((0.6, 1.0, -8.0), 0.058609742636332040514),
    ((0.5, 0.5, -4.0), 0.01619175304751072739),
    ((0.9, 0.5, -24.807692307692307), -0.011346976903843032470),
    ((0.99, 1.0, -30.884615384615387), 0.00034869128627073764),
    ((0.25, 0.5, -4.0), 0.066676545599100243504),
    ((0.75, 0.5, -25.0), -0.0081344253809421405719),
    ((0.75, 0.5, -9.0), -0.02198482197863359366),
    ((0.9, 1.0, -16.0), 0.0073691725711018619316),
    ((0.9, 1.0, -25.0), 0.0045121471218401887483),
]

WRIGHT_TABLE = [
    ((-1.0, -0.25, 1.0), 0.42142532803379838433),
    ((-2.0, -0.35, 1.0), 0.16612155233677260541),
    ((-0.5, -0.25, 0.75), 0.56796881884076957498),
    ((1.5, 0.5, 1.0), 4.3681779046765494497),
    ((-3.0, -0.45, 1.0), 0.041963538532603938428),
    ((2.0, -0.2, 0.8), 3.3164482843146035295),
]

FRAC_ERF_AT_1 = {
    0.3: 0.60018748475558599862,
    0.5: 0.57857467196620161567,
    0.7: 0.55630951761838096618,
    0.9: 0.53287843698662188969,
    0.99: 0.52176271491290893927,
    0.999: 0.52062643200585576676,
}


class TestGamma:
    def test_known_values(self):
        assert specfun.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
        assert specfun.gamma(5.0) == 24.0
        assert specfun.gamma(-0.5) == pytest.approx(-2.0 * math.sqrt(math.pi), rel=1e-15)

    @pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
    def test_poles(self, x):
        with pytest.raises(PoleError):
            specfun.gamma(x)

    def test_overflow(self):
        with pytest.raises(RangeError):
            specfun.gamma(200.0)

    @pytest.mark.parametrize("x", [0.0, -1.0, -30.0])
    def test_reciprocal_vanishes_at_poles(self, x):
        assert specfun.reciprocal_gamma(x) == 0.0

    # frozen with mpmath.rgamma; scipy overflows at -170.75
    @pytest.mark.parametrize("x,ref", [
        (-170.25, -5.903749694035476e+306),
        (-170.75, -7.720158616540472e+307),
        (171.5, special.rgamma(171.5)),
    ])
    def test_reciprocal_log_branch(self, x, ref):
        assert specfun.reciprocal_gamma(x) == pytest.approx(ref, rel=1e-12, abs=1e-320)

    def test_reciprocal_overflow(self):
        with pytest.raises(RangeError):
            specfun.reciprocal_gamma(-180.5)

    @given(st.floats(min_value=-20.0, max_value=20.0).filter(lambda v: abs(v - round(v)) > 1e-3))
    def test_recurrence(self, x):
        assert specfun.gamma(x + 1.0) == pytest.approx(x * specfun.gamma(x), rel=1e-12)
        assert specfun.reciprocal_gamma(x) * specfun.gamma(x) == pytest.approx(1.0, rel=1e-13)


class TestMittagLeffler:
    @pytest.mark.parametrize("args,ref", ML_TABLE)
    def test_frozen_values(self, args, ref):
        rep = specfun.mittag_leffler(*args)
        assert rep.converged
        assert abs(rep.value - ref) <= max(1e-13 * max(1.0, abs(ref)), 2.0 * rep.error_bound)

    def test_exponential(self):
        z = np.linspace(-5.0, 5.0, 101)
        rel = [abs(specfun.ml(1.0, 1.0, v) - math.exp(v)) / math.exp(v) for v in z]
        assert max(rel) <= 1e-12

    @pytest.mark.parametrize("x", [0.1, 1.0, 2.0, 4.5, 7.0, 12.0, 30.0])
    def test_half_order_is_scaled_erfc(self, x):
        # E_{1/2}(-x) = exp(x^2) erfc(x)
        assert specfun.ml(0.5, 1.0, -x) == pytest.approx(special.erfcx(x), rel=1e-12)

    @given(st.floats(min_value=-4.0, max_value=4.0))
    def test_cosh_and_first_moment(self, z):
        assert specfun.ml(2.0, 1.0, z * z) == pytest.approx(math.cosh(z), rel=1e-13)
        if abs(z) > 1e-3:
            assert specfun.ml(1.0, 2.0, z) == pytest.approx(math.expm1(z) / z, rel=1e-12)

    @pytest.mark.parametrize("rho,beta,z", [(0.1, 1.0, -1.5), (0.1, 0.5, -3.0), (0.75, 0.5, -10.0), (0.99, 1.0, -20.0)])
    def test_hard_negative_arguments_report_small_bounds(self, rho, beta, z):
        rep = specfun.mittag_leffler(rho, beta, z)
        assert rep.error_bound <= 16 * specfun.EPS * max(1.0, abs(rep.value))
        assert rep.method in {"series", "asymptotic", "multiprecision"}

    def test_asymptotic_branch_used_far_out(self):
        rep = specfun.mittag_leffler(0.5, 1.0, -30.0)
        assert rep.method == "asymptotic"
        assert rep.value == pytest.approx(special.erfcx(30.0), rel=1e-13)

    def test_zero_argument(self):
        assert specfun.ml(0.7, 1.3, 0.0) == pytest.approx(1.0 / math.gamma(1.3), rel=1e-15)

    def test_range_error_for_huge_positive(self):
        with pytest.raises(RangeError):
            specfun.mittag_leffler(0.5, 1.0, 40.0)

    def test_bad_rho(self):
        with pytest.raises(DomainError):
            specfun.mittag_leffler(0.0, 1.0, 1.0)

    def test_bad_tol(self):
        with pytest.raises(DomainError):
            specfun.mittag_leffler(0.5, 1.0, 1.0, tol=0.0)

    def test_report_is_float_like(self):
        rep = specfun.mittag_leffler(0.5, 1.0, 1.0)
        assert float(rep) == rep.value
        assert rep.error_bound == rep.truncation_bound + rep.rounding_bound

    @pytest.mark.parametrize("alpha", [0.3, 0.6, 0.9])
    def test_time_derivative_matches_finite_difference(self, alpha):
        c, t, h = 1.7, 0.6, 1e-5
        f = lambda s: specfun.ml(alpha, 1.0, c * s**alpha)
        fd = (f(t + h) - f(t - h)) / (2.0 * h)
        assert specfun.mittag_leffler_time_derivative(alpha, c, t) == pytest.approx(fd, rel=1e-8)

    def test_time_derivative_needs_positive_t(self):
        with pytest.raises(DomainError):
            specfun.mittag_leffler_time_derivative(0.5, 1.0, 0.0)


class TestWright:
    @pytest.mark.parametrize("args,ref", WRIGHT_TABLE)
    def test_frozen_values(self, args, ref):
        assert specfun.wright(*args).value == pytest.approx(ref, rel=1e-13)

    def test_erfc_identity(self):
        x = np.linspace(0.0, 4.0, 81)
        err = [abs(specfun.wright(-v, -0.5, 1.0).value - special.erfc(v / 2.0)) for v in x]
        assert max(err) <= 1e-10

    @given(st.floats(min_value=0.0, max_value=6.0))
    def test_bessel_identity(self, z):
        # W(z; 1, 1) = I_0(2 sqrt z)
        assert specfun.wright(z, 1.0, 1.0).value == pytest.approx(special.iv(0, 2.0 * math.sqrt(z)), rel=1e-13)

    @given(st.floats(min_value=-3.0, max_value=3.0), st.floats(min_value=0.2, max_value=2.0))
    def test_rho_zero_is_scaled_exponential(self, z, beta):
        assert specfun.wright(z, 0.0, beta).value == pytest.approx(math.exp(z) / math.gamma(beta), rel=1e-13)

    @pytest.mark.parametrize("rho,beta", [(-0.25, 1.0), (-0.4, 0.8), (0.5, 1.0)])
    def test_derivative_shift(self, rho, beta):
        z, h = -0.7, 1e-5
        fd = (specfun.wright(z + h, rho, beta).value - specfun.wright(z - h, rho, beta).value) / (2 * h)
        assert specfun.wright(z, rho, rho + beta).value == pytest.approx(fd, rel=1e-8)

    def test_rho_must_exceed_minus_one(self):
        with pytest.raises(DomainError):
            specfun.wright(1.0, -1.0, 1.0)


class TestFracErf:
    @pytest.mark.parametrize("alpha,ref", sorted(FRAC_ERF_AT_1.items()))
    def test_frozen_values(self, alpha, ref):
        assert specfun.frac_erf(1.0, alpha) == pytest.approx(ref, rel=1e-13)

    def test_classical_limit_is_monotone(self):
        gaps = [abs(specfun.frac_erf(1.0, a) - math.erf(0.5)) for a in (0.9, 0.99, 0.999)]
        assert gaps[0] > gaps[1] > gaps[2]

    def test_origin(self):
        assert specfun.frac_erf(0.0, 0.5) == pytest.approx(0.0, abs=1e-15)

    @given(st.floats(min_value=0.0, max_value=5.0), st.floats(min_value=0.01, max_value=1.0),
           st.sampled_from([0.3, 0.5, 0.8]))
    def test_increasing(self, x, dx, alpha):
        assert specfun.frac_erf(x + dx, alpha) > specfun.frac_erf(x, alpha)

    def test_negative_x(self):
        with pytest.raises(DomainError):
            specfun.frac_erf(-1.0, 0.5)


def test_convergence_error_is_arithmetic():
    assert issubclass(ConvergenceError, ArithmeticError)
