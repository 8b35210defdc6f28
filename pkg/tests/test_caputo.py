import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracfront import specfun
from fracfront.caputo import (
    FractionalOrder,
    TimeMesh,
    caputo_l1,
    caputo_l1_all,
    caputo_quadrature_oracle,
    empirical_order,
    extremum_estimate_check,
    l1_coefficients,
    l1_weights,
)
from fracfront.errors import DomainError

# 2 / Gamma(3 - a), frozen with mpmath: Caputo derivative of t^2 at t = 1
CAPUTO_T2 = {0.3: 1.2947616535572535963, 0.5: 1.5045055561273500985, 0.7: 1.7142192439189261005}


def random_mesh(draw_steps):
    return TimeMesh(np.concatenate(([0.0], np.cumsum(draw_steps))))


steps_strategy = st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=2, max_size=30)
alpha_strategy = st.floats(min_value=0.05, max_value=0.95)


class TestTypes:
    @pytest.mark.parametrize("a", [0.0, 1.0, -0.2, 1.5])
    def test_order_range(self, a):
        with pytest.raises(DomainError):
            FractionalOrder(a)

    def test_order_gamma_constants(self):
        o = FractionalOrder(0.5)
        assert o.gamma_2ma == pytest.approx(math.gamma(1.5))
        assert o.gamma_1ma == pytest.approx(math.sqrt(math.pi))

    def test_mesh_validation(self):
        with pytest.raises(DomainError):
            TimeMesh(np.array([0.1, 0.2]))
        with pytest.raises(DomainError):
            TimeMesh(np.array([0.0, 0.5, 0.5]))
        with pytest.raises(DomainError):
            TimeMesh(np.array([0.0]))

    def test_mesh_is_read_only(self):
        m = TimeMesh.uniform_mesh(1.0, 4)
        with pytest.raises(ValueError):
            m.nodes[1] = 3.0

    def test_graded_mesh(self):
        m = TimeMesh.graded(2.0, 10, 2.0)
        assert m.T == 2.0 and m.N == 10
        assert np.all(np.diff(m.steps) > 0)
        with pytest.raises(DomainError):
            TimeMesh.graded(1.0, 10, 0.5)


class TestL1:
    @given(steps_strategy, alpha_strategy)
    def test_coefficients_positive_and_increasing(self, steps, a):
        mesh = random_mesh(steps)
        order = FractionalOrder(a)
        for n in range(1, len(mesh)):
            c = l1_coefficients(order, mesh.nodes, n)
            assert np.all(c > 0.0)
            # monotone weights make the scheme a convex combination (discrete max principle)
            assert np.all(np.diff(c) >= -1e-12 * c[1:])

    @given(steps_strategy, alpha_strategy, st.floats(-3, 3), st.floats(-3, 3))
    def test_exact_for_affine_signals(self, steps, a, p, q):
        mesh = random_mesh(steps)
        order = FractionalOrder(a)
        f = p * mesh.nodes + q
        n = mesh.N
        exact = p * mesh.T ** (1.0 - a) / math.gamma(2.0 - a)
        assert caputo_l1(f, order, n, mesh) == pytest.approx(exact, rel=1e-10, abs=1e-12)

    def test_weights_object(self):
        mesh = TimeMesh.uniform_mesh(1.0, 8)
        w = l1_weights(FractionalOrder(0.4), mesh, 5)
        assert w.diagonal == w.coeffs[-1]
        with pytest.raises(DomainError):
            w.apply(np.zeros(3))
        with pytest.raises(DomainError):
            l1_weights(FractionalOrder(0.4), mesh, 9)

    def test_all_levels_match_single(self):
        mesh = TimeMesh.graded(1.0, 12, 1.5)
        f = np.sin(mesh.nodes)
        o = FractionalOrder(0.6)
        allv = caputo_l1_all(f, o, mesh)
        assert np.isnan(allv[0])
        for n in range(1, len(mesh)):
            assert allv[n] == pytest.approx(caputo_l1(f, o, n, mesh), rel=1e-14)

    def test_length_mismatch(self):
        mesh = TimeMesh.uniform_mesh(1.0, 4)
        with pytest.raises(DomainError):
            caputo_l1(np.zeros(7), FractionalOrder(0.5), 4, mesh)

    @pytest.mark.parametrize("a", [0.3, 0.5, 0.7])
    def test_quadratic_converges_at_two_minus_alpha(self, a):
        order = FractionalOrder(a)
        Ns = [32, 64, 128, 256]
        errs = []
        for N in Ns:
            m = TimeMesh.uniform_mesh(1.0, N)
            errs.append(abs(caputo_l1(m.nodes**2, order, N, m) - CAPUTO_T2[a]))
        orders = empirical_order([1.0 / N for N in Ns], errs)
        assert np.all(np.abs(orders - (2.0 - a)) < 0.06)

    def test_mittag_leffler_eigen_identity_order(self):
        order = FractionalOrder(0.5)
        exact = 2.0 * specfun.ml(0.5, 1.0, 2.0)
        Ns = [64, 128, 256, 512]
        errs = []
        for N in Ns:
            m = TimeMesh.uniform_mesh(1.0, N)
            f = np.array([specfun.ml(0.5, 1.0, 2.0 * t**0.5) for t in m.nodes])
            errs.append(abs(caputo_l1(f, order, N, m) - exact))
        orders = empirical_order([1.0 / N for N in Ns], errs)
        assert np.all((orders >= 1.3) & (orders <= 1.7))


class TestQuadratureOracle:
    @pytest.mark.parametrize("a", sorted(CAPUTO_T2))
    def test_power(self, a):
        assert caputo_quadrature_oracle(lambda s: 2.0 * s, FractionalOrder(a), 1.0) == pytest.approx(
            CAPUTO_T2[a], rel=1e-12
        )

    def test_linear(self):
        # D^a t = t^(1-a) / Gamma(2-a); at t=4, a=1/2 this is 2 / Gamma(3/2)
        val = caputo_quadrature_oracle(lambda s: 1.0, FractionalOrder(0.5), 4.0)
        assert val == pytest.approx(2.256758334191025, rel=1e-13)

    def test_mittag_leffler_eigenfunction(self):
        # D^a E_a(c t^a) = c E_a(c t^a)
        a, c, t = 0.5, 1.3, 0.8
        val = caputo_quadrature_oracle(
            lambda s: specfun.mittag_leffler_time_derivative(a, c, s) if s > 0 else 0.0,
            FractionalOrder(a), t, tol=1e-8,
        )
        assert val == pytest.approx(c * specfun.ml(a, 1.0, c * t**a), rel=1e-7)

    def test_needs_positive_t(self):
        with pytest.raises(DomainError):
            caputo_quadrature_oracle(lambda s: 1.0, FractionalOrder(0.5), 0.0)


class TestExtremumEstimate:
    @given(
        st.lists(st.floats(min_value=0.0, max_value=2.0), min_size=3, max_size=25),
        st.sampled_from([0.25, 0.5, 0.75]),
        st.floats(min_value=-1.0, max_value=1.0),
    )
    def test_concave_right_max(self, slopes, a, h0):
        # decreasing nonnegative increments: concave, maximum at the right end
        inc = np.sort(np.asarray(slopes))[::-1]
        mesh = TimeMesh.uniform_mesh(1.0, inc.size)
        h = h0 + np.concatenate(([0.0], np.cumsum(inc * mesh.steps)))
        res = extremum_estimate_check(h, mesh, FractionalOrder(a), inc.size)
        assert res.holds

    @given(st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=3, max_size=25),
           st.sampled_from([0.25, 0.5, 0.75]))
    def test_any_right_max(self, vals, a):
        # the discrete estimate needs only that t0 is the maximum
        h = np.asarray(vals + [max(vals) + 0.1])
        mesh = TimeMesh.uniform_mesh(2.0, h.size - 1)
        assert extremum_estimate_check(h, mesh, FractionalOrder(a), h.size - 1).holds

    def test_rejects_interior_max(self):
        mesh = TimeMesh.uniform_mesh(1.0, 4)
        with pytest.raises(DomainError):
            extremum_estimate_check(np.array([0.0, 2.0, 1.0, 1.5, 1.8]), mesh, FractionalOrder(0.5), 4)

    def test_equality_for_one_step(self):
        mesh = TimeMesh.uniform_mesh(1.0, 1)
        res = extremum_estimate_check(np.array([0.0, 1.0]), mesh, FractionalOrder(0.5), 1)
        # one step: lhs = 1/Gamma(2-a), rhs = 1/Gamma(1-a); lhs >= rhs since Gamma(2-a) = (1-a) Gamma(1-a)
        assert res.lhs == pytest.approx(1.0 / math.gamma(1.5))
        assert res.rhs == pytest.approx(1.0 / math.gamma(0.5))
        assert res.holds


def test_empirical_order_recovers_power():
    h = np.array([0.1, 0.05, 0.025])
    assert np.allclose(empirical_order(h, 3.0 * h**1.5), 1.5)
