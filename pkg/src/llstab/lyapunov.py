"""Lyapunov functional, its decay bound, and discrete lemma certificates.

    V(m) = f(k)/2 ||m - r||^2 + 1/2 ||m_x||^2
    dV/dt <= -nu k f(k) ||m x (m - r)||^2

All norms are trapezoid L2 norms on the grid; ``m_x`` is the forward
difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dynamics import EquilibriumPoint, SimParams, f_admissible
from .grid_field import (
    SPHERE_TOL,
    GridSpec,
    MagnetizationField,
    cross,
    diff_forward,
    dot,
    integrate,
    l2_norm_sq,
    laplacian_neumann,
)

__all__ = [
    "LyapunovSample",
    "LemmaReport",
    "lyapunov_V",
    "exchange_energy",
    "decay_bound",
    "dVdt_estimate",
    "eps_num",
    "lyapunov_observer",
    "samples_from_trajectory",
    "count_violations",
    "check_lemma1",
    "check_lemma2",
    "check_lemma3",
    "observed_order",
    "convergence_study",
    "smooth_neumann_field",
    "f_admissible",
]


@dataclass(frozen=True)
class LyapunovSample:
    t: float
    V: float
    dVdt_est: float
    bound: float
    err_norm: float
    cross_h_norm_sq: float


@dataclass(frozen=True)
class LemmaReport:
    lemma_id: str
    residual: float
    grid_N: int
    observed_order: float | None = None


def _diff(m: MagnetizationField, r: EquilibriumPoint) -> MagnetizationField:
    return m.with_values(m.values - r.r)


def lyapunov_V(m: MagnetizationField, r: EquilibriumPoint, f_of_k: float) -> float:
    if not f_of_k > 0:
        raise ValueError("f(k) must be positive")
    return 0.5 * f_of_k * l2_norm_sq(_diff(m, r)) + exchange_energy(m)


def exchange_energy(m: MagnetizationField) -> float:
    """``1/2 ||m_x||^2``, the gradient part of V.

    Forward differences live on cells, so each gets the full weight ``dx``.
    This is the quadrature whose gradient is exactly the mirror-ghost
    Laplacian, which makes V conserved by the undamped semi-discrete flow.
    """
    d = diff_forward(m).values[:-1]
    return 0.5 * m.dx * float(np.sum(d * d))


def cross_h_norm_sq(m: MagnetizationField, r: EquilibriumPoint) -> float:
    h = m.values - r.r
    return integrate(np.sum(cross(m.values, h) ** 2, axis=1), m.grid)


def decay_bound(m: MagnetizationField, r: EquilibriumPoint, nu: float, k: float, f_of_k: float) -> float:
    """Right-hand side of the decay inequality; never positive."""
    if not f_admissible(f_of_k, k):
        raise ValueError(f"inadmissible gain pair f(k)={f_of_k}, k={k}")
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    return -nu * k * f_of_k * cross_h_norm_sq(m, r)


def dVdt_estimate(s1, s2) -> float:
    """Difference quotient of V between two samples (anything with ``t`` and ``V``)."""
    gap = s2.t - s1.t
    if gap == 0:
        raise ZeroDivisionError("samples share the same time")
    return (s2.V - s1.V) / gap


def eps_num(dt: float, dx: float, V: float) -> float:
    """Discretisation allowance for the decay inequality."""
    return 10.0 * (dt**2 + dx**2) * (1.0 + abs(V))


def lyapunov_observer(r: EquilibriumPoint, params: SimParams) -> Callable:
    def observe(state):
        m = state.m
        chs = cross_h_norm_sq(m, r)
        return {
            "V": lyapunov_V(m, r, params.f_of_k),
            "bound": -params.nu * params.k * params.f_of_k * chs,
            "err_norm": math.sqrt(l2_norm_sq(_diff(m, r))),
            "cross_h_norm_sq": chs,
        }

    return observe


def samples_from_trajectory(traj) -> list[LyapunovSample]:
    """Build samples from a trajectory recorded with :func:`lyapunov_observer`.

    ``dVdt_est`` is the forward quotient to the next sample (backward for
    the last one, 0 for a single sample).
    """
    t, V = traj.t, traj["V"]
    n = len(t)
    out = []
    for i in range(n):
        if n == 1:
            slope = 0.0
        elif i < n - 1:
            slope = (V[i + 1] - V[i]) / (t[i + 1] - t[i])
        else:
            slope = (V[i] - V[i - 1]) / (t[i] - t[i - 1])
        out.append(
            LyapunovSample(
                t=float(t[i]),
                V=float(V[i]),
                dVdt_est=float(slope),
                bound=float(traj["bound"][i]),
                err_norm=float(traj["err_norm"][i]),
                cross_h_norm_sq=float(traj["cross_h_norm_sq"][i]),
            )
        )
    return out


def count_violations(samples: Sequence[LyapunovSample], dt: float, dx: float) -> int:
    """Count strides whose slope of V exceeds the bound plus ``eps_num``.

    The bound over a stride is the mean of its endpoint values.
    """
    bad = 0
    for a, b in zip(samples[:-1], samples[1:]):
        slope = dVdt_estimate(a, b)
        bound = 0.5 * (a.bound + b.bound)
        if slope > bound + eps_num(dt, dx, max(abs(a.V), abs(b.V))):
            bad += 1
    return bad


def _central(v: np.ndarray, dx: float) -> np.ndarray:
    # mirror ghosts: the derivative vanishes at both ends
    out = np.zeros_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * dx)
    return out


def check_lemma1(m: MagnetizationField) -> LemmaReport:
    """Compare ``d/dx (m x m_x)`` with ``m x m_xx`` at interior nodes.

    Both derivatives of ``g = m x m_x`` use central differences; the
    residual is taken over nodes ``2..N-2``, whose stencils never touch a
    ghost node.
    """
    if m.N < 4:
        raise ValueError("lemma 1 check needs N >= 4")
    v, dx = m.values, m.dx
    g = cross(v, _central(v, dx))
    gx = _central(g, dx)
    rhs = cross(v, laplacian_neumann(m).values)
    res = float(np.max(np.linalg.norm(gx[2:-2] - rhs[2:-2], axis=1)))
    return LemmaReport("L1", res, m.N)


def check_lemma2(m: MagnetizationField, r: EquilibriumPoint) -> LemmaReport:
    """|integral of (m - r) . (m x m_xx)| with the Neumann Laplacian."""
    integrand = dot(m.values - r.r, cross(m.values, laplacian_neumann(m).values))
    return LemmaReport("L2", abs(integrate(integrand, m.grid)), m.N)


def check_lemma3(m_node, r) -> float:
    """``||m x r||`` for unit vectors; rejects non-unit input."""
    m_node = np.asarray(m_node, dtype=float)
    r = np.asarray(getattr(r, "r", r), dtype=float)
    for name, v in (("m", m_node), ("r", r)):
        if abs(np.linalg.norm(v) - 1.0) > SPHERE_TOL:
            raise ValueError(f"{name} must be a unit vector, got norm {np.linalg.norm(v)!r}")
    return float(np.linalg.norm(cross(m_node, r)))


def observed_order(Ns: Sequence[int], residuals: Sequence[float]) -> float:
    """Least-squares slope of ``-log(residual)`` against ``log(N)``.

    NaN if any residual is zero or not finite.
    """
    res = np.asarray(residuals, dtype=float)
    if np.any(~np.isfinite(res)) or np.any(res <= 0):
        return float("nan")
    slope = np.polyfit(np.log(np.asarray(Ns, dtype=float)), np.log(res), 1)[0]
    return float(-slope)


def convergence_study(check, field_factory, Ns: Sequence[int], *args) -> list[LemmaReport]:
    """Run ``check(field_factory(GridSpec(N)), *args)`` over ``Ns``.

    The last report carries the fitted order.
    """
    reports = [check(field_factory(GridSpec(N)), *args) for N in Ns]
    order = observed_order(Ns, [rep.residual for rep in reports])
    last = reports[-1]
    reports[-1] = LemmaReport(last.lemma_id, last.residual, last.grid_N, order)
    return reports


def smooth_neumann_field(grid: GridSpec) -> MagnetizationField:
    """Unit field built from cosines, so its slope vanishes at both ends."""
    x = grid.x / grid.L
    raw = np.stack([np.cos(np.pi * x), 0.5 * np.cos(2 * np.pi * x), np.ones_like(x)], axis=1)
    return MagnetizationField(raw / np.linalg.norm(raw, axis=1)[:, None], grid, on_sphere=True)
