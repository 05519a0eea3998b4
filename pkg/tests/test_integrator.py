import math

import numpy as np
import pytest

from llstab.dynamics import EquilibriumPoint, PeriodicInput, SimParams, control_proportional, zero_control
from llstab.experiments import perturbed_initial
from llstab.grid_field import DegenerateNodeError, GridSpec, MagnetizationField, renormalize
from llstab.dynamics import llg_rhs_with_additive_input
from llstab.integrator import IntegratorConfig, SimState, simulate, stable_dt, step

R = EquilibriumPoint([1.0, 0.0, 0.0])


def rk4_oracle(m, params, r, inp, dt, n, project=True):
    """RK4 assembled from the public field operations."""

    def f(field, t):
        u = control_proportional(field, r, params.k) if r is not None else zero_control(field)
        uh = inp.evaluate(t) if inp is not None else np.zeros(3)
        return llg_rhs_with_additive_input(field, u, params.nu, uh).values

    t = 0.0
    for _ in range(n):
        v = m.values
        a = f(m, t)
        b = f(m.with_values(v + 0.5 * dt * a), t + 0.5 * dt)
        c = f(m.with_values(v + 0.5 * dt * b), t + 0.5 * dt)
        d = f(m.with_values(v + dt * c), t + dt)
        m = m.with_values(v + dt / 6 * (a + 2 * b + 2 * c + d))
        if project:
            m = renormalize(m)
        t += dt
    return m


def rk4_amplification(z):
    return np.abs(1 + z + z**2 / 2 + z**3 / 6 + z**4 / 24)


def neumann_laplacian_eigs(N, dx):
    A = np.zeros((N + 1, N + 1))
    for j in range(N + 1):
        A[j, j] = -2
        A[j, 1 if j == 0 else j - 1] += 1
        A[j, N - 1 if j == N else j + 1] += 1
    return np.linalg.eigvals(A / dx**2).real


class TestStableDt:
    @pytest.mark.parametrize("nu", [0.0, 0.02, 0.5, 2.0])
    def test_linear_spectrum_inside_region(self, nu):
        N = 32
        dx = 1.0 / N
        mu = -neumann_laplacian_eigs(N, dx)
        dt = stable_dt(dx, nu)
        z = -np.concatenate([mu, mu]) * np.concatenate([np.full(N + 1, nu + 1j), np.full(N + 1, nu - 1j)]) * dt
        assert np.max(rk4_amplification(z)) <= 1 + 1e-9
        assert np.max(rk4_amplification(1.05 * z)) > 1

    def test_undamped_closed_form(self):
        # RK4 reaches the imaginary axis at 2 sqrt(2)
        dx = 0.01
        assert stable_dt(dx, 0.0) == pytest.approx(2 * math.sqrt(2) * dx**2 / 4, rel=1e-9)

    def test_scaling(self):
        assert stable_dt(0.02, 0.02) == pytest.approx(4 * stable_dt(0.01, 0.02), rel=1e-12)
        assert stable_dt(0.01, 0.02) > 0

    def test_euler(self):
        assert stable_dt(0.01, 0.0, "euler_projected") == 0.0
        nu = 0.5
        # |1 - s (nu + i)| <= 1  <=>  s <= 2 nu / (nu^2 + 1)
        assert stable_dt(0.01, nu, "euler_projected") == pytest.approx(2 * nu / (nu**2 + 1) * 1e-4 / 4)

    def test_rejects(self):
        with pytest.raises(ValueError):
            stable_dt(0.0, 0.02)
        with pytest.raises(ValueError):
            stable_dt(0.1, -1.0)
        with pytest.raises(ValueError):
            IntegratorConfig(scheme="leapfrog")
        with pytest.raises(ValueError):
            IntegratorConfig(scheme="euler_projected").resolve_dt(0.1, 0.0)

    def test_unprojected_growth_beyond_bound(self):
        # far past the bound the linear instability overflows the unprojected field
        g = GridSpec(32)
        params = SimParams(grid=g)
        m0 = perturbed_initial(R, g, 0.01)
        cfg = IntegratorConfig(dt=20 * stable_dt(g.dx, params.nu), project=False)
        with pytest.raises(DegenerateNodeError) as info:
            simulate(SimState(0.0, m0), params, R, None, cfg, 10.0, stride=10_000)
        assert info.value.t is not None and info.value.t > 0


class TestStep:
    def test_fixed_point(self):
        g = GridSpec(16)
        r = EquilibriumPoint([0.6, 0.0, 0.8])
        params = SimParams(grid=g)
        traj = simulate(SimState(0.0, r.field(g)), params, r, None, IntegratorConfig(), 1.0, stride=10_000)
        assert np.max(np.abs(traj.final.m.values - r.r)) <= 1e-12

    def test_euler_hand_example(self):
        # uniform (0,0,1) with input (a,0,0): Euler gives (a dt, 0, 1), then projection
        g = GridSpec(4)
        m0 = MagnetizationField.constant([0.0, 0.0, 1.0], g)
        params = SimParams(grid=g)
        a, dt = 0.01, 1e-4
        cfg = IntegratorConfig(dt=dt, scheme="euler_projected")
        out = step(SimState(0.0, m0), params, None, PeriodicInput(a, 1.0, 1), cfg)
        expect = np.array([a * dt, 0.0, 1.0]) / math.hypot(a * dt, 1.0)
        np.testing.assert_allclose(out.m.values, np.tile(expect, (5, 1)), rtol=0, atol=1e-16)
        assert out.t == dt
        assert out.m.on_sphere

    def test_grid_mismatch(self):
        params = SimParams(grid=GridSpec(8))
        with pytest.raises(ValueError):
            step(SimState(0.0, MagnetizationField.constant([1, 0, 0], GridSpec(4))), params)


class TestKernelAgainstOracle:
    @pytest.mark.parametrize("project", [True, False])
    def test_rk4_matches_public_ops(self, project):
        g = GridSpec(24)
        params = SimParams(nu=0.1, k=0.3, grid=g)
        m0 = perturbed_initial(R, g, 0.4)
        inp = PeriodicInput(0.05, 2.0, 2)
        dt = 0.5 * stable_dt(g.dx, params.nu)
        n = 40
        cfg = IntegratorConfig(dt=dt, project=project)
        got = simulate(SimState(0.0, m0), params, R, inp, cfg, n * dt, stride=7).final.m.values
        want = rk4_oracle(m0, params, R, inp, dt, n, project).values
        assert np.max(np.abs(got - want)) <= 1e-13

    def test_no_control_path(self):
        g = GridSpec(12)
        params = SimParams(nu=0.02, grid=g)
        m0 = perturbed_initial(R, g, 0.3)
        dt = 0.5 * stable_dt(g.dx, params.nu)
        got = simulate(SimState(0.0, m0), params, None, None, IntegratorConfig(dt=dt), 30 * dt, stride=30)
        want = rk4_oracle(m0, params, None, None, dt, 30)
        assert np.max(np.abs(got.final.m.values - want.values)) <= 1e-13


class TestSimulate:
    def test_zero_length(self):
        g = GridSpec(8)
        m0 = perturbed_initial(R, g)
        traj = simulate(SimState(0.0, m0), SimParams(grid=g), R, None, IntegratorConfig(), 0.0)
        assert len(traj) == 1 and traj.n_steps == 0
        np.testing.assert_array_equal(traj.final.m.values, m0.values)

    def test_deterministic_and_stride_independent(self):
        g = GridSpec(16)
        params = SimParams(grid=g)
        m0 = perturbed_initial(R, g, 0.5)
        run = lambda stride: simulate(SimState(0.0, m0), params, R, None, IntegratorConfig(), 0.5, stride=stride)
        a, b, c = run(50), run(50), run(1)
        np.testing.assert_array_equal(a.final.m.values, b.final.m.values)
        np.testing.assert_array_equal(a.final.m.values, c.final.m.values)
        assert a.final.t == c.final.t

    def test_constraint_held_over_many_steps(self):
        g = GridSpec(32)
        params = SimParams(grid=g)
        m0 = perturbed_initial(R, g, 0.5)
        cfg = IntegratorConfig()
        dt = cfg.resolve_dt(g.dx, params.nu)
        traj = simulate(SimState(0.0, m0), params, R, None, cfg, 10_000 * dt, stride=10_000)
        assert traj.n_steps == 10_000
        assert traj.max_norm_deviation <= 1e-12
        assert traj.final.m.max_norm_deviation() <= 1e-12

    def test_observers_and_snapshots(self):
        g = GridSpec(8)
        m0 = perturbed_initial(R, g)
        cfg = IntegratorConfig(dt=1e-4)
        traj = simulate(
            SimState(0.0, m0), SimParams(grid=g), R, None, cfg, 1e-2,
            observers=[lambda s: {"mx0": s.m.values[0, 0]}], stride=25, keep_snapshots=True,
        )
        assert len(traj) == 5 and len(traj.snapshots) == 5
        np.testing.assert_allclose(traj.t, [0, 0.0025, 0.005, 0.0075, 0.01], atol=1e-15)
        assert traj["mx0"][0] == m0.values[0, 0]

    def test_time_order_rk4(self):
        # errors against a fine reference shrink by ~16 per halving
        g = GridSpec(8)
        params = SimParams(nu=0.3, k=0.25, grid=g)
        m0 = perturbed_initial(R, g, 0.8)
        T = 0.5
        base = stable_dt(g.dx, params.nu) * 0.9
        n0 = math.ceil(T / base)

        def final(n):
            cfg = IntegratorConfig(dt=T / n)
            return simulate(SimState(0.0, m0), params, R, None, cfg, T, stride=n).final.m.values

        ref = final(16 * n0)
        errs = [np.max(np.abs(final(n0 * 2**i) - ref)) for i in range(3)]
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders >= 2.0), (errs, orders)
