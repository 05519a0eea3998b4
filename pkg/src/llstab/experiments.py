"""Stabilisation runs and the periodic-input (hysteresis) frequency sweep."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dynamics import EquilibriumPoint, PeriodicInput, SimParams
from .grid_field import GridSpec, MagnetizationField, cross, l2_norm, normalize_vec
from .integrator import IntegratorConfig, SimState, simulate
from .lyapunov import (
    LyapunovSample,
    count_violations,
    lyapunov_observer,
    samples_from_trajectory,
)

# fraction of the input amplitude allowed between the start and end of the final period
CLOSURE_TOL = 0.01


@dataclass
class StabilizationReport:
    samples: list[LyapunovSample]
    converged: bool
    t_converge: float | None
    violations: int
    max_norm_deviation: float
    dt: float
    n_steps: int

    @property
    def V(self) -> np.ndarray:
        return np.array([s.V for s in self.samples])

    @property
    def err_norm(self) -> np.ndarray:
        return np.array([s.err_norm for s in self.samples])


@dataclass
class HysteresisRun:
    omega: float
    component: int
    t: np.ndarray
    uhat: np.ndarray
    m_out: np.ndarray
    xstar: float
    loop_area: float
    closed: bool
    samples_per_period: int
    max_norm_deviation: float = 0.0

    @property
    def series(self) -> list[tuple[float, float, float]]:
        return list(zip(self.t.tolist(), self.uhat.tolist(), self.m_out.tolist()))

    def final_period(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.samples_per_period + 1
        return self.uhat[-n:], self.m_out[-n:]


def tangent_direction(r: EquilibriumPoint) -> np.ndarray:
    """A unit vector orthogonal to ``r``."""
    e = np.zeros(3)
    e[int(np.argmin(np.abs(r.r)))] = 1.0
    return normalize_vec(cross(r.r, e))


def perturbed_initial(r: EquilibriumPoint, grid: GridSpec, amplitude: float = 0.1) -> MagnetizationField:
    """``normalize(r + amplitude cos(pi x / L) t)`` for a tangent ``t``.

    The cosine bump has zero slope at both ends.
    """
    bump = amplitude * np.cos(np.pi * grid.x / grid.L)
    raw = r.r + bump[:, None] * tangent_direction(r)
    return MagnetizationField(raw / np.linalg.norm(raw, axis=1)[:, None], grid, on_sphere=True)


def ball_radius(grid: GridSpec) -> float:
    """L2 radius below which initial data is accepted (``-r`` sits at ``2 sqrt(L)``)."""
    return 2.0 * (1.0 - 1e-6) * math.sqrt(grid.L)


def run_stabilization(
    params: SimParams,
    r: EquilibriumPoint,
    m0: MagnetizationField,
    t_end: float = 200.0,
    tol_conv: float = 1e-3,
    cfg: IntegratorConfig = IntegratorConfig(),
    sample_every: float = 0.5,
) -> StabilizationReport:
    """Simulate the feedback ``u = k (r - m)`` and certify the decay of V."""
    if not m0.on_sphere:
        raise ValueError("initial magnetisation must lie on the unit sphere")
    if m0.grid != params.grid:
        raise ValueError("initial field and params use different grids")
    dist = l2_norm(m0.with_values(m0.values - r.r))
    if dist >= ball_radius(params.grid):
        raise ValueError(
            f"initial data is {dist:.6g} from r in L2; must be below {ball_radius(params.grid):.6g}"
        )
    cfg = replace(cfg, project=True)
    dt = cfg.resolve_dt(params.grid.dx, params.nu)
    stride = max(1, round(sample_every / dt))
    traj = simulate(
        SimState(0.0, m0), params, r, None, cfg, t_end,
        observers=[lyapunov_observer(r, params)], stride=stride,
    )
    samples = samples_from_trajectory(traj)
    err = traj["err_norm"]
    hits = np.flatnonzero(err < tol_conv)
    t_conv = float(traj.t[hits[0]]) if hits.size else None
    return StabilizationReport(
        samples=samples,
        converged=bool(err[-1] < tol_conv),
        t_converge=t_conv,
        violations=count_violations(samples, dt, params.grid.dx),
        max_norm_deviation=traj.max_norm_deviation,
        dt=dt,
        n_steps=traj.n_steps,
    )


def loop_area(u: Sequence[float], y: Sequence[float]) -> float:
    """Absolute shoelace area of the closed polygon through ``(u_i, y_i)``."""
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(0.5 * abs(np.dot(u, np.roll(y, -1)) - np.dot(np.roll(u, -1), y)))


def cycle_closed(y: Sequence[float], amplitude: float) -> bool:
    y = np.asarray(y, dtype=float)
    return bool(abs(y[-1] - y[0]) <= CLOSURE_TOL * abs(amplitude))


@dataclass(frozen=True)
class HysteresisSetup:
    """Everything a periodic-input run needs except the frequency."""

    params: SimParams
    r: EquilibriumPoint
    m0: MagnetizationField
    amplitude: float = 0.01
    component: int = 1
    periods: int = 3
    xstar: float = 1.0
    samples_per_period: int = 512
    cfg: IntegratorConfig = field(default_factory=lambda: IntegratorConfig(project=False))
    control: bool = True


def run_hysteresis(setup: HysteresisSetup, omega: float) -> HysteresisRun:
    """Drive the system with ``amplitude cos(omega t)`` and record the output loop.

    The step is shrunk so that each period holds an integer number of
    steps and samples; the loop area is taken over the final period.
    """
    p = setup.params
    if setup.periods < 3:
        raise ValueError("need at least 3 periods (the first ones are transient)")
    if not 0 <= setup.xstar <= p.grid.L:
        raise ValueError(f"xstar={setup.xstar} outside [0, {p.grid.L}]")
    inp = PeriodicInput(setup.amplitude, omega, setup.component)
    dt_max = setup.cfg.resolve_dt(p.grid.dx, p.nu)
    spp = setup.samples_per_period
    stride = max(1, math.ceil(inp.period / (spp * dt_max)))
    dt = inp.period / (spp * stride)
    cfg = replace(setup.cfg, dt=dt)
    node = int(round(setup.xstar / p.grid.dx))
    c = setup.component - 1

    def observe(state):
        return {"uhat": inp.scalar(state.t), "m_out": state.m.values[node, c]}

    traj = simulate(
        SimState(0.0, setup.m0), p, setup.r if setup.control else None, inp, cfg,
        setup.periods * inp.period, observers=[observe], stride=stride,
    )
    u_last, y_last = traj["uhat"][-(spp + 1):], traj["m_out"][-(spp + 1):]
    closed = cycle_closed(y_last, setup.amplitude)
    if not closed:
        warnings.warn(
            f"omega={omega}: output cycle not closed after {setup.periods} periods; "
            "loop area includes transient",
            stacklevel=2,
        )
    return HysteresisRun(
        omega=float(omega),
        component=setup.component,
        t=traj.t,
        uhat=traj["uhat"],
        m_out=traj["m_out"],
        xstar=node * p.grid.dx,
        loop_area=loop_area(u_last[:-1], y_last[:-1]),
        closed=closed,
        samples_per_period=spp,
        max_norm_deviation=traj.max_norm_deviation,
    )


class SweepError(RuntimeError):
    """Some runs of a sweep failed; ``runs`` holds the ones that finished."""

    def __init__(self, runs: list[HysteresisRun], errors: dict[tuple[int, float], BaseException]):
        detail = ", ".join(f"component {c}, omega={w}: {e}" for (c, w), e in errors.items())
        super().__init__(f"{len(errors)} sweep run(s) failed: {detail}")
        self.runs = runs
        self.errors = errors


def frequency_sweep(
    setup: HysteresisSetup, omegas: Sequence[float], max_workers: int | None = None
) -> list[HysteresisRun]:
    """One independent run per frequency, executed concurrently.

    Results follow the order of ``omegas``.  Failures are collected and
    raised together as :class:`SweepError` once every run has finished.
    """
    omegas = [float(w) for w in omegas]
    if not omegas:
        raise ValueError("need at least one frequency")
    if any(not w > 0 for w in omegas):
        raise ValueError(f"frequencies must be positive, got {omegas}")
    return _sweep([(setup, w) for w in omegas], max_workers)


def _sweep(jobs, max_workers):
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [pool.submit(run_hysteresis, s, w) for s, w in jobs]
        runs, errors = [], {}
        for (s, w), fut in zip(jobs, futures):
            try:
                runs.append(fut.result())
            except Exception as exc:  # collected, re-raised below
                errors[(s.component, w)] = exc
    if errors:
        raise SweepError(runs, errors)
    return runs


def axis_setups(
    grid: GridSpec = GridSpec(64, 1.0),
    nu: float = 0.02,
    k: float = 0.25,
    amplitude: float = 0.01,
    periods: int = 3,
    xstar: float | None = None,
    cfg: IntegratorConfig | None = None,
) -> list[HysteresisSetup]:
    """The three input/output pairings: ``m0 = r = e_i``, input on component ``i``."""
    params = SimParams(nu=nu, k=k, grid=grid)
    setups = []
    for i in (1, 2, 3):
        e = np.zeros(3)
        e[i - 1] = 1.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            r = EquilibriumPoint(e)
        setups.append(
            HysteresisSetup(
                params=params,
                r=r,
                m0=MagnetizationField.constant(e, grid),
                amplitude=amplitude,
                component=i,
                periods=periods,
                xstar=grid.L if xstar is None else xstar,
                cfg=cfg or IntegratorConfig(project=False),
            )
        )
    return setups


def setups_sweep(
    setups: Sequence[HysteresisSetup], omegas: Sequence[float], max_workers: int | None = None
) -> dict[int, list[HysteresisRun]]:
    """Sweep every setup over ``omegas``; keyed by output component."""
    jobs = [(s, float(w)) for s in setups for w in omegas]
    runs = _sweep(jobs, max_workers)
    out: dict[int, list[HysteresisRun]] = {}
    for run in runs:
        out.setdefault(run.component, []).append(run)
    return out
