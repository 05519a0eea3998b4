"""Explicit time stepping with nodewise projection onto the unit sphere."""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from . import _kernels
from .dynamics import EquilibriumPoint, PeriodicInput, SimParams
from .grid_field import DegenerateNodeError, MagnetizationField

log = logging.getLogger(__name__)

SCHEMES = {"rk4_projected": _kernels.RK4, "euler_projected": _kernels.EULER}


@functools.lru_cache(maxsize=64)
def _rk4_radius(nu: float) -> float:
    """Distance from 0 to the RK4 stability boundary along ``-(nu + i)``."""
    d = complex(-nu, -1.0) / math.hypot(nu, 1.0)

    def growth(s):
        z = s * d
        return abs(1 + z + z**2 / 2 + z**3 / 6 + z**4 / 24)

    s, ds = 0.0, 1e-3
    while growth(s + ds) <= 1.0 + 1e-14:
        s += ds
        if s > 10:
            break
    lo, hi = s, s + ds
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if growth(mid) <= 1.0 + 1e-14:
            lo = mid
        else:
            hi = mid
    return lo


def stable_dt(dx: float, nu: float, scheme: str = "rk4_projected") -> float:
    """Largest linearly stable explicit step for the semi-discrete system.

    Linearised about a uniform state the exchange term has eigenvalues
    ``-mu (nu +- i)`` with ``0 <= mu <= 4 / dx**2``; the step is chosen so
    that all of them sit inside the scheme's stability region.  Forward
    Euler has no stable step when ``nu == 0`` and returns 0.
    """
    if not dx > 0:
        raise ValueError("dx must be positive")
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    scale = math.hypot(nu, 1.0)
    if scheme == "rk4_projected":
        radius = _rk4_radius(float(nu))
    elif scheme == "euler_projected":
        radius = 2.0 * nu / scale
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return radius * dx**2 / (4.0 * scale)


@dataclass(frozen=True)
class IntegratorConfig:
    """``dt=None`` selects ``cfl_safety * stable_dt``.

    ``project=False`` skips the renormalisation; used for the additive
    input experiments, where the norm is part of the response.
    """

    dt: float | None = None
    scheme: str = "rk4_projected"
    cfl_safety: float = 0.5
    project: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEMES)}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    def resolve_dt(self, dx: float, nu: float) -> float:
        bound = stable_dt(dx, nu, self.scheme)
        if self.dt is None:
            if bound <= 0:
                raise ValueError(f"{self.scheme} has no stable step at nu={nu}; give dt explicitly")
            return self.cfl_safety * bound
        if self.dt > bound:
            log.warning("dt=%.3e exceeds the linear stability bound %.3e", self.dt, bound)
        return self.dt


@dataclass(frozen=True)
class SimState:
    t: float
    m: MagnetizationField

    def __post_init__(self):
        if not self.t >= 0:
            raise ValueError(f"time must be >= 0, got {self.t}")


Observer = Callable[[SimState], Mapping[str, float]]


@dataclass
class Trajectory:
    t: np.ndarray
    columns: dict[str, np.ndarray]
    final: SimState
    dt: float
    n_steps: int
    max_norm_deviation: float
    snapshots: list[MagnetizationField] | None = None

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __len__(self) -> int:
        return len(self.t)


def _kernel_args(params: SimParams, control: EquilibriumPoint | None, inp: PeriodicInput | None):
    if control is None:
        k, r = 0.0, np.zeros(3)
    else:
        k, r = float(params.k), np.array(control.r, dtype=float)
    if inp is None:
        amp, omega, comp = 0.0, 1.0, -1
    else:
        amp, omega, comp = float(inp.amplitude), float(inp.omega), inp.component - 1
    return k, r, amp, omega, comp


def _advance(values, t0, step0, n, dt, params, control, inp, cfg):
    k, r, amp, omega, comp = _kernel_args(params, control, inp)
    failed, dev = _kernels.advance(
        values, float(t0), int(step0), int(n), float(dt), float(params.grid.dx), float(params.nu),
        k, r, amp, omega, comp, SCHEMES[cfg.scheme], bool(cfg.project),
    )
    if failed != _kernels.OK:
        t_fail = t0 + failed * dt
        raise DegenerateNodeError(
            f"integration broke down at t={t_fail:.6g} (step {failed}); reduce dt", t=t_fail
        )
    return dev


def _check_grid(state: SimState, params: SimParams) -> None:
    if state.m.grid != params.grid:
        raise ValueError(f"state grid {state.m.grid} does not match params grid {params.grid}")


def step(
    state: SimState,
    params: SimParams,
    control: EquilibriumPoint | None = None,
    inp: PeriodicInput | None = None,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> SimState:
    """One explicit step of the full right-hand side, then projection.

    ``control=None`` means ``u = 0``; otherwise ``u = params.k (r - m)``.
    """
    _check_grid(state, params)
    dt = cfg.resolve_dt(params.grid.dx, params.nu)
    values = np.array(state.m.values)
    _advance(values, state.t, 0, 1, dt, params, control, inp, cfg)
    return SimState(state.t + dt, state.m.with_values(values, on_sphere=cfg.project))


def simulate(
    state0: SimState,
    params: SimParams,
    control: EquilibriumPoint | None,
    inp: PeriodicInput | None,
    cfg: IntegratorConfig,
    t_end: float,
    observers: Iterable[Observer] = (),
    stride: int = 1,
    keep_snapshots: bool = False,
) -> Trajectory:
    """Step from ``state0`` until ``t >= t_end``.

    Observers are called on the initial state, after every ``stride``
    steps, and on the final state.  Each returns a mapping of named scalars
    that become trajectory columns.
    """
    _check_grid(state0, params)
    if t_end < state0.t:
        raise ValueError(f"t_end={t_end} precedes the initial time {state0.t}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    observers = list(observers)
    dt = cfg.resolve_dt(params.grid.dx, params.nu)
    n_total = max(0, math.ceil((t_end - state0.t) / dt - 1e-9))

    times: list[float] = []
    rows: list[dict[str, float]] = []
    snaps: list[MagnetizationField] = []
    values = np.array(state0.m.values)
    max_dev = state0.m.max_norm_deviation() if cfg.project else 0.0

    def record(state):
        times.append(state.t)
        row: dict[str, float] = {}
        for obs in observers:
            row.update(obs(state))
        rows.append(row)
        if keep_snapshots:
            snaps.append(state.m)

    state = state0
    record(state)
    done = 0
    while done < n_total:
        n = min(stride, n_total - done)
        dev = _advance(values, state0.t, done, n, dt, params, control, inp, cfg)
        max_dev = max(max_dev, dev)
        done += n
        state = SimState(state0.t + done * dt, state0.m.with_values(values, on_sphere=cfg.project))
        record(state)

    names = list(rows[0]) if rows else []
    columns = {name: np.array([row[name] for row in rows]) for name in names}
    return Trajectory(
        t=np.array(times),
        columns=columns,
        final=state,
        dt=dt,
        n_steps=n_total,
        max_norm_deviation=max_dev,
        snapshots=snaps if keep_snapshots else None,
    )

