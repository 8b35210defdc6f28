import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracfront.caputo import TimeMesh
from fracfront.domain import (
    LABELS,
    BoundaryCurve,
    MovingRegion,
    ProblemData,
    backward_quotient_sup,
    classify_lattice,
    parabolic_boundary_samples,
    validate_hypotheses,
)
from fracfront.errors import DomainError

MESH = TimeMesh.uniform_mesh(1.0, 20)


def zero(t):
    return 0.0 * np.asarray(t, dtype=float)


class TestBoundaryCurve:
    def test_scalar_and_array_calls(self):
        c = BoundaryCurve.power(2.0, 0.5, 1.0)
        assert isinstance(c(0.25), float) and c(0.25) == pytest.approx(2.0)
        assert np.allclose(c(np.array([0.0, 1.0])), [1.0, 3.0])

    def test_scalar_only_callable_is_vectorized(self):
        import math

        c = BoundaryCurve(lambda t: math.sqrt(t))
        assert np.allclose(c(np.array([1.0, 4.0])), [1.0, 2.0])

    def test_linear_lipschitz_defaults(self):
        c = BoundaryCurve.linear(-2.0, 1.0)
        assert c.upper_lipschitz == 2.0 and c.lower_lipschitz == 0.0

    def test_reflection_swaps_constants(self):
        c = BoundaryCurve.linear(3.0, 1.0).reflected()
        assert c(1.0) == -4.0
        assert c.upper_lipschitz == 3.0 and c.lower_lipschitz == 0.0

    def test_table(self):
        c = BoundaryCurve.table([0.0, 1.0], [0.0, 2.0])
        assert c(0.25) == 0.5
        with pytest.raises(DomainError):
            BoundaryCurve.table([0.0, 0.0], [1.0, 2.0])

    def test_negative_power(self):
        with pytest.raises(DomainError):
            BoundaryCurve.power(1.0, -0.5)


class TestBackwardQuotient:
    @given(st.floats(min_value=-3.0, max_value=3.0))
    def test_linear_curve_quotient_is_slope(self, c):
        curve = BoundaryCurve.linear(c, 0.5)
        sup_r, _ = backward_quotient_sup(curve, MESH.nodes, "right")
        sup_l, _ = backward_quotient_sup(curve, MESH.nodes, "left")
        assert sup_r == pytest.approx(c, abs=1e-10)
        assert sup_l == pytest.approx(-c, abs=1e-10)

    def test_witness_pair(self):
        # s = -t^2 on the right: quotient (s(t)-s(t0))/(t-t0) = -(t+t0) is largest near t = t0 = 0
        curve = BoundaryCurve.power(-1.0, 2.0)
        sup, (t, t0) = backward_quotient_sup(curve, MESH.nodes, "right")
        assert t < t0
        assert sup == pytest.approx(-(t + t0))
        assert (t, t0) == (0.0, pytest.approx(0.05))

    def test_sqrt_blows_up_near_zero(self):
        curve = BoundaryCurve.power(1.0, 0.5).reflected()
        fine, _ = backward_quotient_sup(curve, TimeMesh.uniform_mesh(1.0, 400).nodes, "left")
        coarse, _ = backward_quotient_sup(curve, MESH.nodes, "left")
        assert fine > 4.0 * coarse


class TestRegion:
    def test_endpoints_and_extremes(self):
        r = MovingRegion(BoundaryCurve.linear(-1.0, 0.0), BoundaryCurve.power(1.0, 0.5, 1.0), 1.0)
        assert (r.a, r.b) == (0.0, 1.0)
        assert r.a0 == pytest.approx(-1.0) and r.b0 == pytest.approx(2.0)

    def test_reflected(self):
        r = MovingRegion(BoundaryCurve.const(0.0), BoundaryCurve.linear(1.0, 1.0), 2.0).reflected()
        assert r.s1(1.0) == -2.0 and r.s2(1.0) == 0.0

    def test_invalid(self):
        with pytest.raises(DomainError):
            MovingRegion(BoundaryCurve.const(0.0), BoundaryCurve.const(1.0), 0.0)
        with pytest.raises(DomainError):
            MovingRegion(BoundaryCurve.const(0.0), BoundaryCurve.const(1.0), 1.0, lam=2.0)

    def test_problem_data_reflection(self):
        d = ProblemData(lambda x: x + 2.0, lambda t: 1.0, lambda t: 5.0).reflected()
        assert d.f(1.0) == pytest.approx(1.0)
        assert d.g(0.3) == 5.0 and d.h(0.3) == 1.0


class TestHypotheses:
    def base(self, **kw):
        s1 = kw.pop("s1", BoundaryCurve.const(0.0))
        s2 = kw.pop("s2", BoundaryCurve.const(1.0))
        region = MovingRegion(s1, s2, 1.0)
        data = ProblemData(kw.pop("f", lambda x: x), kw.pop("g", zero), kw.pop("h", lambda t: 1.0 + 0 * t))
        return validate_hypotheses(region, data, MESH)

    def test_all_pass(self):
        rep = self.base()
        assert rep.all_passed and not rep.failures()
        assert [v.name for v in rep.verdicts] == ["H1", "H2", "H3", "H4", "H5", "H6"]

    def test_shrinking_right_curve_passes(self):
        # H2 limits how fast s2 can grow; a curve moving left never violates it
        rep = self.base(s2=BoundaryCurve.linear(-0.5, 3.0, lower_lipschitz=0.0))
        assert rep["H2"].passed

    def test_h2_checks_expanding_right_curve(self):
        # on the right side the quotient is (s(t)-s(t0))/(t-t0) = c for s = c t
        rep = self.base(s2=BoundaryCurve.linear(2.0, 1.0, lower_lipschitz=1.0))
        assert not rep["H2"].passed
        assert rep["H2"].witness["quotient"] == pytest.approx(2.0)

    def test_undeclared_is_audited(self):
        rep = self.base(s2=BoundaryCurve.power(1.0, 0.5, 1.0))
        assert rep["H2"].passed and "audited" in rep["H2"].note

    def test_crossing_curves(self):
        rep = self.base(s1=BoundaryCurve.linear(2.0, 0.0, upper_lipschitz=0.0))
        assert not rep["H4"].passed
        assert rep["H4"].witness["t"] == pytest.approx(0.5)

    def test_negative_initial_data(self):
        rep = self.base(f=lambda x: x - 0.25)
        assert not rep["H5"].passed
        assert rep["H5"].witness["x"] == 0.0

    def test_missing_initial_profile(self):
        rep = self.base(f=None)
        assert not rep["H5"].passed

    def test_zero_width_start(self):
        region = MovingRegion(BoundaryCurve.const(0.0), BoundaryCurve.power(1.0, 0.5), 1.0)
        rep = validate_hypotheses(region, ProblemData(None, zero, zero), MESH)
        assert rep["H5"].passed and rep["H3"].note == "no initial condition"

    def test_negative_boundary_signal(self):
        rep = self.base(h=lambda t: 0.5 - np.asarray(t))
        assert not rep["H6"].passed
        assert rep["H6"].witness["signal"] == "h"

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_non_finite_curve(self):
        s1 = BoundaryCurve(lambda t: np.log(np.asarray(t, dtype=float)), upper_lipschitz=0.0)
        with np.errstate(divide="ignore"):
            assert not self.base(s1=s1)["H1"].passed


class TestLattice:
    def test_partition(self):
        r = MovingRegion(BoundaryCurve.const(0.0), BoundaryCurve.linear(0.5, 0.5), 1.0)
        x = np.linspace(0.0, 1.0, 11)
        masks = classify_lattice(r, x, MESH)
        total = sum(masks[k].astype(int) for k in LABELS)
        assert np.all(total == 1)
        assert masks["bottom"][0].sum() == 6
        assert masks["left"][1:, 0].all()
        # s2(t) = 0.5 + t/2 lands on x = 1 exactly at t = 1
        assert masks["right"][-1, -1]
        assert masks["exterior"][1, -1]

    def test_degenerate_start_has_no_bottom(self):
        r = MovingRegion(BoundaryCurve.const(0.0), BoundaryCurve.power(1.0, 0.5), 1.0)
        masks = classify_lattice(r, np.linspace(0.0, 1.0, 11), MESH)
        assert not masks["bottom"].any()

    def test_boundary_samples(self):
        r = MovingRegion(BoundaryCurve.const(0.0), BoundaryCurve.const(1.0), 1.0)
        s = parabolic_boundary_samples(r, MESH, 5)
        assert len(s) == 2 * 21 + 5
        assert {b.which for b in s} == {"left", "right", "bottom"}
        with pytest.raises(DomainError):
            parabolic_boundary_samples(r, MESH, 1)
