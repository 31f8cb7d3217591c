import numpy as np
import pytest
from hypothesis import given, strategies as st

from charpit import linalg, weil
from charpit.errors import DegenerateError
from charpit.linalg import AugmentedSystem

finite = st.floats(-10, 10, allow_nan=False)


class TestProportionality:
    def test_exact_ratio(self):
        assert linalg.proportionality_factor((2, 0, 2, 0, 0), (1, 0, 1, 0, 0)) == 0.5

    def test_zero_vector(self):
        assert linalg.proportionality_factor((1, 2), (0, 0)) == 0.0

    def test_not_proportional(self):
        assert linalg.proportionality_factor((1, 2), (2, 1)) is None

    def test_returns_float(self):
        assert type(linalg.proportionality_factor(np.array([1.0, 2.0]), np.array([3.0, 6.0]))) is float

    def test_not_proper(self):
        with pytest.raises(DegenerateError):
            linalg.proportionality_factor((0, 0), (1, 1))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            linalg.proportionality_factor((1, 2), (1, 2, 3))


class TestKernelContainment:
    def test_eikonal_direction(self):
        assert linalg.kernel_containment_generic((1.2, 1.6), (0.6, 0.8))
        assert linalg.proportionality_factor((1.2, 1.6), (0.6, 0.8)) == pytest.approx(0.5)

    def test_orthogonal(self):
        assert not linalg.kernel_containment_generic((1, 0), (0, 1))

    def test_zero(self):
        assert linalg.kernel_containment_generic((1, 0), (0, 0))

    @given(st.lists(finite, min_size=2, max_size=5), finite)
    def test_routes_agree_on_multiples(self, a, lam):
        if max(abs(v) for v in a) < 1e-3:
            return
        b = [lam * v for v in a]
        assert linalg.kernel_containment_generic(a, b)

    @given(st.lists(finite, min_size=2, max_size=5), st.lists(finite, min_size=5, max_size=5))
    def test_routes_agree(self, a, b):
        if max(abs(v) for v in a) < 1e-3:
            return
        # raises ArithmeticError on disagreement
        linalg.kernel_containment_generic(a, b[: len(a)])


class TestSystems:
    A = AugmentedSystem(2, 0, 0, 0)

    def test_characteristic(self):
        B = linalg.neighbour_system(0.01, 0, 0, 0)
        assert linalg.system_containment_factor(self.A, B) == pytest.approx(0.005)

    def test_identity(self):
        assert linalg.system_containment_factor(self.A, self.A) == 1.0

    def test_not_contained(self):
        assert linalg.system_containment_factor(self.A, linalg.neighbour_system(0, 0.01, 0, 0)) is None

    def test_not_proper(self):
        with pytest.raises(DegenerateError):
            linalg.system_containment_factor(AugmentedSystem(0, 0, 1, 1), self.A)


class TestStaircase:
    def test_eikonal(self):
        part, ker = linalg.solve_staircase(AugmentedSystem(2, 0, 0, 0))
        assert np.allclose(part, 0)
        assert np.allclose(np.abs(ker), [0, 0, 1])

    def test_linear(self):
        part, ker = linalg.solve_staircase(AugmentedSystem(1, 2, 0, 0))
        assert np.allclose(part, 0)
        assert np.allclose(np.cross(ker, [4, -2, 1]), 0, atol=1e-15)

    def test_back_substitution(self):
        part, ker = linalg.solve_staircase(AugmentedSystem(1, 0, 3, 5))
        assert np.allclose(part, [3, 5, 0])
        assert np.allclose(np.abs(ker), [0, 0, 1])

    @given(finite, finite, finite, finite, finite)
    def test_solution_line(self, p1, p2, r1, r2, c):
        A = AugmentedSystem(p1, p2, r1, r2)
        if not A.is_proper(1e-3):
            return
        part, ker = linalg.solve_staircase(A)
        assert A.satisfied_by(part + c * ker, 1e-9)
        assert np.isclose(np.linalg.norm(ker), 1.0)

    def test_not_proper(self):
        with pytest.raises(DegenerateError):
            linalg.solve_staircase(AugmentedSystem(0, 0, 1, 0))


class TestBasePoint:
    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_only_zero(self, n):
        assert linalg.is_base_point_only_zero(n)

    def test_coefficient_is_twice_z(self):
        spec = weil.BlockSpec.of((2, 1), (2, 1))
        z1, z2 = weil.generators(spec, 0)
        z = [0.5 * z1 - z2, 3 * z2]
        for i, zi in enumerate(z):
            u = weil.generator(spec, 1, i)
            assert weil.coefficient_of((zi + u) * (zi + u), 1, i) == 2 * zi
        assert not linalg.base_point_accepts(z, 1)

    def test_zero_accepted(self):
        spec = weil.BlockSpec.of((3, 1), (3, 1))
        assert linalg.base_point_accepts([weil.WeilElement.constant(spec, 0.0)] * 3, 1)
