"""Vector algebra on 3-vectors and finite-difference calculus on 1-D grids.

Fields are stored node-major as ``(N + 1, 3)`` float arrays on a
vertex-centred grid ``x_j = j * dx``, ``j = 0..N``, so both wire ends are
grid nodes.  Homogeneous Neumann conditions are imposed through mirror
ghost nodes ``f[-1] = f[1]`` and ``f[N + 1] = f[N - 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Nodes whose norm falls below this are treated as a blow-up.
DEGENERATE_NORM = 1e-8
SPHERE_TOL = 1e-12


class DegenerateNodeError(ArithmeticError):
    """A node has (near) zero or non-finite norm and cannot be projected."""

    def __init__(self, message: str, node: int | None = None, t: float | None = None):
        super().__init__(message)
        self.node = node
        self.t = t


@dataclass(frozen=True)
class GridSpec:
    N: int
    L: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"grid needs a positive integer cell count, got N={self.N}")
        if not self.L > 0:
            raise ValueError(f"wire length must be positive, got L={self.L}")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.N + 1)


@dataclass(frozen=True, eq=False)
class MagnetizationField:
    """Nodal values of a 3-vector field on ``[0, L]``.

    ``values`` is copied and made read-only on construction.  ``on_sphere``
    is a claim checked at construction: every node has unit norm to
    ``SPHERE_TOL``.
    """

    values: np.ndarray
    grid: GridSpec
    on_sphere: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"field values must have shape (N+1, 3), got {v.shape}")
        if v.shape[0] != self.grid.N + 1:
            raise ValueError(
                f"field has {v.shape[0]} nodes but grid N={self.grid.N} needs {self.grid.N + 1}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if self.on_sphere:
            dev = np.max(np.abs(np.linalg.norm(v, axis=1) - 1.0))
            if dev > SPHERE_TOL:
                raise ValueError(f"field flagged on_sphere but max |norm - 1| = {dev:.3e}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.grid.N

    @property
    def dx(self) -> float:
        return self.grid.dx

    @property
    def L(self) -> float:
        return self.grid.L

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def with_values(self, values, on_sphere: bool = False) -> "MagnetizationField":
        return MagnetizationField(values, self.grid, on_sphere=on_sphere)

    @classmethod
    def constant(cls, vec, grid: GridSpec) -> "MagnetizationField":
        vec = np.asarray(vec, dtype=float)
        values = np.broadcast_to(vec, (grid.N + 1, 3))
        unit = abs(np.linalg.norm(vec) - 1.0) <= SPHERE_TOL
        return cls(values, grid, on_sphere=bool(unit))

    @classmethod
    def from_function(cls, func, grid: GridSpec) -> "MagnetizationField":
        """Sample ``func(x) -> (N+1, 3)`` at the grid nodes."""
        return cls(np.asarray(func(grid.x), dtype=float), grid)

    def node_norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)

    def max_norm_deviation(self) -> float:
        return float(np.max(np.abs(self.node_norms() - 1.0)))


def cross(a, b) -> np.ndarray:
    """Right-handed cross product over the last axis (broadcasts)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2]
    b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1], axis=-1)


def dot(a, b) -> np.ndarray:
    return np.sum(np.asarray(a, dtype=float) * np.asarray(b, dtype=float), axis=-1)


def triple_cross(a, b, c) -> np.ndarray:
    """``a x (b x c)`` evaluated as nested cross products."""
    return cross(a, cross(b, c))


def bac_cab(a, b, c) -> np.ndarray:
    """``b (a.c) - c (a.b)``; the expansion of :func:`triple_cross`."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    return b * dot(a, c)[..., None] - c * dot(a, b)[..., None]


def field_cross(f: MagnetizationField, g: MagnetizationField) -> MagnetizationField:
    _check_same_grid(f, g)
    return f.with_values(cross(f.values, g.values))


def laplacian_neumann(f: MagnetizationField) -> MagnetizationField:
    """Second-order central difference with mirror ghosts at both ends."""
    if f.N < 2:
        raise ValueError(f"Neumann Laplacian needs N >= 2, got N={f.N}")
    v = f.values
    padded = np.empty((v.shape[0] + 2, 3))
    padded[1:-1] = v
    padded[0] = v[1]
    padded[-1] = v[-2]
    lap = (padded[2:] - 2.0 * padded[1:-1] + padded[:-2]) / f.dx**2
    return f.with_values(lap)


def diff_forward(f: MagnetizationField) -> MagnetizationField:
    """Forward differences at nodes ``0..N-1``; node ``N`` is zero."""
    v = f.values
    out = np.zeros_like(v)
    out[:-1] = (v[1:] - v[:-1]) / f.dx
    return f.with_values(out)


def trapezoid_weights(grid: GridSpec) -> np.ndarray:
    w = np.full(grid.N + 1, grid.dx)
    w[0] = w[-1] = 0.5 * grid.dx
    return w


def integrate(values: np.ndarray, grid: GridSpec) -> float:
    """Composite trapezoid rule for a nodal scalar."""
    return float(np.dot(trapezoid_weights(grid), values))


def l2_norm_sq(f: MagnetizationField) -> float:
    """Trapezoid approximation of the squared L2 norm."""
    return integrate(np.sum(f.values**2, axis=1), f.grid)


def l2_norm(f: MagnetizationField) -> float:
    return float(np.sqrt(l2_norm_sq(f)))


def renormalize(f) -> MagnetizationField:
    """Project every node onto the unit sphere.

    Raises :class:`DegenerateNodeError` if any node norm is below
    ``DEGENERATE_NORM`` or non-finite.
    """
    if not isinstance(f, MagnetizationField):
        raise TypeError("renormalize expects a MagnetizationField")
    norms = f.node_norms()
    bad = np.flatnonzero(~(norms >= DEGENERATE_NORM))
    if bad.size:
        j = int(bad[0])
        raise DegenerateNodeError(f"node {j} has norm {norms[j]:.3e}; cannot project", node=j)
    return f.with_values(f.values / norms[:, None], on_sphere=True)


def normalize_vec(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not n >= DEGENERATE_NORM:
        raise DegenerateNodeError(f"vector {v} has norm {n:.3e}")
    return v / n


def _check_same_grid(f: MagnetizationField, g: MagnetizationField) -> None:
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")
