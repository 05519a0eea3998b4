import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import unit_field
from llstab.dynamics import (
    EquilibriumPoint,
    PeriodicInput,
    SimParams,
    UnsupportedCaseError,
    control_proportional,
    f_admissible,
    is_in_E,
    llg_rhs,
    llg_rhs_with_additive_input,
    solve_collinear,
    zero_control,
)
from llstab.grid_field import GridSpec, MagnetizationField, cross, dot


def const(vec, N=2):
    return MagnetizationField.constant(vec, GridSpec(N))


class TestAdmissibility:
    @pytest.mark.parametrize("k", [1e-6, 0.1, 0.25, 0.5])
    def test_f_equals_k_accepted(self, k):
        assert f_admissible(k, k)

    def test_rejections(self):
        assert not f_admissible(0.6, 0.6)
        assert not f_admissible(0.0, 0.25)
        assert not f_admissible(-0.1, 0.25)
        assert not f_admissible(0.8, 0.25)

    def test_nonpositive_gain(self):
        with pytest.raises(ValueError):
            f_admissible(0.1, 0.0)

    def test_params_gate(self):
        with pytest.raises(ValueError, match=r"\|f\(k\) \+ k\| <= 1"):
            SimParams(k=0.6)
        assert SimParams(k=0.5).f_of_k == 0.5
        with pytest.raises(ValueError):
            SimParams(nu=-0.1)


class TestControl:
    def test_hand_example(self):
        m = const([0.0, 1.0, 0.0])
        u = control_proportional(m, EquilibriumPoint([1, 0, 0]), 0.25)
        np.testing.assert_array_equal(u.values, np.tile([0.25, -0.25, 0.0], (3, 1)))

    def test_vanishes_at_r(self):
        r = EquilibriumPoint([0.6, 0.8, 0.0])
        np.testing.assert_array_equal(control_proportional(r.field(GridSpec(4)), r, 0.3).values, 0.0)

    def test_zero_control(self):
        np.testing.assert_array_equal(zero_control(const([0, 0, 1])).values, 0.0)

    def test_gain_positive(self):
        with pytest.raises(ValueError):
            control_proportional(const([1, 0, 0]), EquilibriumPoint([1, 0, 0]), 0.0)


class TestRhs:
    def test_single_node_hand_example(self):
        # m x h = (0,1,0); m x (m x h) = (-1,0,0)
        m = const([0.0, 0.0, 1.0])
        u = m.with_values(np.tile([1.0, 0.0, 0.0], (3, 1)))
        np.testing.assert_allclose(llg_rhs(m, u, 0.02).values, np.tile([0.02, 1.0, 0.0], (3, 1)), atol=1e-15)

    def test_equilibrium_is_fixed(self):
        r = EquilibriumPoint([0.6, 0.0, 0.8])
        m = r.field(GridSpec(16))
        out = llg_rhs(m, control_proportional(m, r, 0.25), 0.02)
        np.testing.assert_array_equal(out.values, 0.0)

    def test_antipode_is_fixed(self):
        r = EquilibriumPoint([1.0, 0.0, 0.0])
        m = const([-1.0, 0.0, 0.0], 16)
        out = llg_rhs(m, control_proportional(m, r, 0.25), 0.02)
        np.testing.assert_array_equal(out.values, 0.0)

    def test_grid_mismatch(self):
        with pytest.raises(ValueError):
            llg_rhs(const([1, 0, 0], 4), zero_control(const([1, 0, 0], 8)), 0.02)

    @settings(max_examples=50)
    @given(
        arrays(np.float64, (17, 3), elements=st.floats(-1, 1)),
        arrays(np.float64, (17, 3), elements=st.floats(-5, 5)),
        st.floats(0, 1),
    )
    def test_tangent(self, raw, u, nu):
        if np.any(np.linalg.norm(raw, axis=1) < 1e-3):
            return
        m = unit_field(raw, GridSpec(16))
        rhs = llg_rhs(m, m.with_values(u), nu).values
        scale = 1 + np.linalg.norm(rhs, axis=1)
        assert np.max(np.abs(dot(rhs, m.values)) / scale) <= 1e-12

    def test_additive_input_breaks_tangency(self):
        m = const([1.0, 0.0, 0.0])
        out = llg_rhs_with_additive_input(m, zero_control(m), 0.02, [0.01, 0.0, 0.0])
        np.testing.assert_array_equal(out.values, np.tile([0.01, 0.0, 0.0], (3, 1)))

    def test_uniform_precession_direction(self):
        # uniform field in a constant field h: pure precession about h plus damping toward h
        m = const([0.0, 1.0, 0.0])
        h = np.array([0.0, 0.0, 2.0])
        out = llg_rhs(m, m.with_values(np.tile(h, (3, 1))), 0.1).values[0]
        np.testing.assert_allclose(out, cross(m.values[0], h) - 0.1 * cross(m.values[0], cross(m.values[0], h)))
        assert out[2] > 0


class TestEquilibria:
    def test_unit_required(self):
        with pytest.raises(ValueError):
            EquilibriumPoint([1.0, 1.0, 0.0])

    def test_r1_zero_warns(self):
        with pytest.warns(UserWarning, match="r1 = 0"):
            EquilibriumPoint([0.0, 1.0, 0.0])

    def test_hashable(self):
        assert EquilibriumPoint([1, 0, 0]) == EquilibriumPoint([1.0, 0.0, 0.0])
        assert len({EquilibriumPoint([1, 0, 0]), EquilibriumPoint([1, 0, 0])}) == 1

    def test_solve_collinear_basis(self):
        sols = solve_collinear(EquilibriumPoint([1.0, 0.0, 0.0]))
        np.testing.assert_array_equal(sols[0], [1, 0, 0])
        np.testing.assert_array_equal(sols[1], [-1, 0, 0])

    def test_solve_collinear_general(self):
        sols = solve_collinear(EquilibriumPoint([0.6, 0.8, 0.0]))
        np.testing.assert_allclose(sols[0], [0.6, 0.8, 0.0], rtol=0, atol=1e-16)
        np.testing.assert_allclose(sols[1], [-0.6, -0.8, 0.0], rtol=0, atol=1e-16)

    def test_solve_collinear_r1_zero(self, quiet_r1_warning):
        with pytest.raises(UnsupportedCaseError):
            solve_collinear(EquilibriumPoint([0.0, 0.0, 1.0]))

    def test_is_in_E(self):
        assert is_in_E(const([0, 0, 1], 8), 1e-12)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            m = const([0, 0, 1], 8)
        v = m.values.copy()
        v[3] = [0, 1, 0]
        assert not is_in_E(m.with_values(v), 1e-3)
        assert not is_in_E(m.with_values(0.5 * m.values), 1e-3)


class TestPeriodicInput:
    def test_values(self):
        p = PeriodicInput(0.01, 1.0, 1)
        np.testing.assert_array_equal(p.evaluate(0.0), [0.01, 0.0, 0.0])
        assert abs(p.scalar(np.pi) + 0.01) <= 1e-17
        assert p.period == 2 * np.pi

    @pytest.mark.parametrize("bad", [dict(omega=0.0), dict(component=4), dict(amplitude=np.inf)])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            PeriodicInput(**bad)
