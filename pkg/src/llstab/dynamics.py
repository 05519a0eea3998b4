"""Right-hand side of the controlled 1-D Landau-Lifshitz equation.

    dm/dt = m x (m_xx + u) - nu m x (m x (m_xx + u))  [+ uhat(t)]

with the proportional feedback ``u = k (r - m)`` steering toward a constant
unit vector ``r``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .grid_field import (
    SPHERE_TOL,
    GridSpec,
    MagnetizationField,
    cross,
    laplacian_neumann,
)


class UnsupportedCaseError(ValueError):
    """Input outside the case the collinearity solution is derived for."""


def f_admissible(f_of_k: float, k: float) -> bool:
    """Gain-function condition making the Lyapunov decay bound nonpositive."""
    if not k > 0:
        raise ValueError(f"gain k must be positive, got {k}")
    return bool(f_of_k > 0 and abs(f_of_k + k) <= 1.0)


@dataclass(frozen=True)
class SimParams:
    """Physical and discretisation parameters of one run.

    ``f_of_k`` defaults to ``k`` (the ``f(k) = k`` gain rule, admissible for
    ``k`` in ``(0, 1/2]``).
    """

    nu: float = 0.02
    k: float = 0.25
    f_of_k: float | None = None
    grid: GridSpec = field(default_factory=lambda: GridSpec(64, 1.0))

    def __post_init__(self):
        if self.f_of_k is None:
            object.__setattr__(self, "f_of_k", self.k)
        if not (math.isfinite(self.nu) and self.nu >= 0):
            raise ValueError(f"damping nu must be finite and >= 0, got {self.nu}")
        if not (math.isfinite(self.k) and self.k > 0):
            raise ValueError(f"gain k must be finite and > 0, got {self.k}")
        if not f_admissible(self.f_of_k, self.k):
            raise ValueError(
                f"inadmissible gain pair: need f(k) > 0 and |f(k) + k| <= 1, "
                f"got f(k)={self.f_of_k}, k={self.k}"
            )


@dataclass(frozen=True)
class EquilibriumPoint:
    """A constant unit vector ``r`` (a member of the equilibrium set).

    ``r[0] == 0`` is allowed with a warning; only :func:`solve_collinear`
    needs ``r[0] != 0``.
    """

    r: np.ndarray

    def __post_init__(self):
        r = np.array(self.r, dtype=float).reshape(3)
        if not np.all(np.isfinite(r)):
            raise ValueError(f"r must be finite, got {r}")
        n = float(np.linalg.norm(r))
        if abs(n - 1.0) > SPHERE_TOL:
            raise ValueError(f"r must be a unit vector, got |r| = {n!r}")
        if r[0] == 0.0:
            warnings.warn(
                f"r = {tuple(r)} has r1 = 0; the collinearity argument assumes r1 != 0",
                stacklevel=3,
            )
        r.flags.writeable = False
        object.__setattr__(self, "r", r)

    def field(self, grid: GridSpec) -> MagnetizationField:
        return MagnetizationField.constant(self.r, grid)

    def __eq__(self, other):
        return isinstance(other, EquilibriumPoint) and np.array_equal(self.r, other.r)

    def __hash__(self):
        return hash(tuple(self.r))


@dataclass(frozen=True)
class PeriodicInput:
    """``amplitude * cos(omega t)`` on one component (1-based index)."""

    amplitude: float = 0.01
    omega: float = 1.0
    component: int = 1

    def __post_init__(self):
        if not math.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.component not in (1, 2, 3):
            raise ValueError(f"component must be 1, 2 or 3, got {self.component}")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    def scalar(self, t: float) -> float:
        return self.amplitude * math.cos(self.omega * t)

    def evaluate(self, t: float) -> np.ndarray:
        out = np.zeros(3)
        out[self.component - 1] = self.scalar(t)
        return out


def control_proportional(m: MagnetizationField, r: EquilibriumPoint, k: float) -> MagnetizationField:
    if not k > 0:
        raise ValueError(f"gain k must be positive, got {k}")
    return m.with_values(k * (r.r - m.values))


def zero_control(m: MagnetizationField) -> MagnetizationField:
    return m.with_values(np.zeros_like(m.values))


def llg_rhs(m: MagnetizationField, u: MagnetizationField, nu: float) -> MagnetizationField:
    """Nodewise time derivative of the controlled equation.

    Tangent to the sphere (``rhs_j . m_j = 0``) whenever ``m`` is on it.
    """
    if m.grid != u.grid:
        raise ValueError(f"grid mismatch between m ({m.grid}) and u ({u.grid})")
    h = laplacian_neumann(m).values + u.values
    prec = cross(m.values, h)
    damp = cross(m.values, prec)
    return m.with_values(prec - nu * damp)


def llg_rhs_with_additive_input(
    m: MagnetizationField, u: MagnetizationField, nu: float, uhat
) -> MagnetizationField:
    # uhat enters outside the cross products, so the result is not tangent in general
    base = llg_rhs(m, u, nu)
    return base.with_values(base.values + np.asarray(uhat, dtype=float).reshape(3))


def solve_collinear(r: EquilibriumPoint) -> list[np.ndarray]:
    """Unit solutions of ``m x r = 0``.

    Solved by elimination on the first component: ``m2 = (r2/r1) m1``,
    ``m3 = (r3/r1) m1`` and the unit constraint gives ``m1 = +-r1``.
    """
    r1, r2, r3 = r.r
    if r1 == 0.0:
        raise UnsupportedCaseError("collinearity solution is derived for r1 != 0")
    out = []
    for m1 in (r1, -r1):
        m = np.array([m1, (r2 / r1) * m1, (r3 / r1) * m1])
        out.append(m)
    return out


def is_in_E(m: MagnetizationField, tol: float) -> bool:
    """True if ``m`` is (to ``tol``) a constant unit-vector field."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    mean = m.values.mean(axis=0)
    spread = float(np.max(np.linalg.norm(m.values - mean, axis=1)))
    return spread <= tol and abs(float(np.linalg.norm(mean)) - 1.0) <= tol
