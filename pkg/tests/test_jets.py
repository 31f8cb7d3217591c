import pytest

from charpit import jets, weil
from charpit.jets import Calotte, Displacement, SurfaceElement

H = 1e-3


def test_restrict():
    assert jets.restrict(Calotte(0, 0, 0, 1, 2, 3, 4, 5)) == SurfaceElement(0, 0, 0, 1, 2)
    assert jets.restrict(Calotte(1, 1, 1, 0, 0, 0, 0, 0)) == SurfaceElement(1, 1, 1, 0, 0)


def test_element_point():
    P = SurfaceElement(0, 0, 0, 1, 2)
    assert jets.element_point(P, H, 0) == (H, 0, H)
    assert jets.element_point(P, 0, 0) == (0, 0, 0)


def test_element_point_generic():
    spec = weil.BlockSpec.of((2, 1))
    e1, e2 = weil.generators(spec, 0)
    x, y, z = jets.element_point(SurfaceElement(0, 0, 0, 1, 0), e1, e2)
    assert (x, y, z) == (e1, e2, e1)


def test_calotte_point():
    K = Calotte(0, 0, 0, 0, 0, 2, 0, 0)
    assert jets.calotte_point(K, H, 0) == pytest.approx((H, 0, H * H), rel=1e-15)
    assert jets.calotte_point(K, 0, 0) == (0, 0, 0)


def test_calotte_point_second_order_generic():
    spec = weil.BlockSpec.of((2, 2))
    dx, dy = weil.generators(spec, 0)
    K = Calotte(0, 0, 0, 1, 0, 2, 3, 4)
    z = jets.calotte_point(K, dx, dy)[2]
    assert z == dx + dx * dx + 3 * dx * dy + 2 * dy * dy


class TestUnitedPosition:
    P = SurfaceElement(0, 0, 0, 1, 2)

    def test_in_plane(self):
        assert jets.united_position(self.P, Displacement(0.01, 0.02, 0.05, 0.3, -0.1))

    def test_reflexive(self):
        assert jets.united_position(self.P, Displacement(0, 0, 0, 0, 0))

    def test_off_plane(self):
        assert not jets.united_position(self.P, Displacement(0.01, 0.02, 0.06, 0, 0))

    def test_generic(self):
        spec = weil.BlockSpec.of((5, 1))
        dx, dy, _, dp, dq = weil.generators(spec, 0)
        d = Displacement.united(self.P, dx, dy, dp, dq)
        assert jets.united_position(self.P, d)
        assert not jets.united_position(self.P, Displacement(dx, dy, d.dz + dp, dp, dq))


def test_reversed_united_position_vanishes():
    assert weil.is_zero(jets.reversed_united_residual(0.37, -2.5))


class TestBelongsTo:
    P = SurfaceElement(0, 0, 0, 1, 2)
    K = Calotte(0, 0, 0, 1, 2, 3, 4, 5)

    def test_required_slope_change(self):
        assert jets.belongs_to(self.P, H, 0, 3 * H, 4 * H, self.K)
        assert not jets.belongs_to(self.P, H, 0, 3 * H, 5 * H, self.K)
        assert not jets.belongs_to(self.P, H, 0, 0, 0, self.K)

    def test_restriction_belongs(self):
        assert jets.belongs_to(self.P, 0, 0, 0, 0, self.K)

    def test_flat_calotte(self):
        flat = Calotte(0, 0, 0, 1, 2, 0, 0, 0)
        assert jets.belongs_to(self.P, 0.3, -0.7, 0, 0, flat)

    def test_restriction_mismatch(self):
        with pytest.raises(ValueError):
            jets.belongs_to(SurfaceElement(0, 0, 0, 1, 3), H, 0, 0, 0, self.K)


class TestJetOfGraph:
    def test_plane(self):
        assert jets.jet_of_graph("x", 0, 0) == SurfaceElement(0, 0, 0, 1, 0)

    def test_cone(self):
        P = jets.jet_of_graph("1 - sqrt((x - 1)^2 + y^2)", 0, 0)
        assert P == SurfaceElement(0, 0, 0, 1, 0)

    def test_second_order(self):
        assert jets.jet_of_graph("0.5*x^2", 0, 0, order=2) == Calotte(0, 0, 0, 0, 0, 1, 0, 0)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            jets.jet_of_graph("x", 0, 0, order=3)

    def test_graph_calotte_contains_graph_neighbours(self):
        # a calotte of z = f contains, to first order, the 1-jets of nearby graph points
        spec = weil.BlockSpec.of((2, 1))
        dx, dy = weil.generators(spec, 0)
        K = jets.jet_of_graph("x^2*y + 3*y^2", 0.5, -1.0, order=2)
        P = jets.restrict(K)
        dp = K.r * dx + K.s * dy
        dq = K.s * dx + K.t * dy
        assert jets.belongs_to(P, dx, dy, dp, dq, K)
