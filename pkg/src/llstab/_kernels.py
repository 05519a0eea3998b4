"""Compiled time-stepping loop.

Mirrors ``dynamics.llg_rhs_with_additive_input`` node for node; the test
suite checks the two against each other.
"""

import math

import numba
import numpy as np

RK4 = 0
EULER = 1

OK = -1


@numba.njit(cache=True, nogil=True)
def _rhs(m, out, inv_dx2, nu, k, r, uh0, uh1, uh2):
    n = m.shape[0]
    for j in range(n):
        jm = 1 if j == 0 else j - 1
        jp = n - 2 if j == n - 1 else j + 1
        m0 = m[j, 0]
        m1 = m[j, 1]
        m2 = m[j, 2]
        h0 = (m[jm, 0] - 2.0 * m0 + m[jp, 0]) * inv_dx2 + k * (r[0] - m0)
        h1 = (m[jm, 1] - 2.0 * m1 + m[jp, 1]) * inv_dx2 + k * (r[1] - m1)
        h2 = (m[jm, 2] - 2.0 * m2 + m[jp, 2]) * inv_dx2 + k * (r[2] - m2)
        a0 = m1 * h2 - m2 * h1
        a1 = m2 * h0 - m0 * h2
        a2 = m0 * h1 - m1 * h0
        b0 = m1 * a2 - m2 * a1
        b1 = m2 * a0 - m0 * a2
        b2 = m0 * a1 - m1 * a0
        out[j, 0] = a0 - nu * b0 + uh0
        out[j, 1] = a1 - nu * b1 + uh1
        out[j, 2] = a2 - nu * b2 + uh2


@numba.njit(cache=True, nogil=True)
def _input(t, amp, omega, comp):
    v = amp * math.cos(omega * t) if comp >= 0 else 0.0
    return (v if comp == 0 else 0.0, v if comp == 1 else 0.0, v if comp == 2 else 0.0)


@numba.njit(cache=True, nogil=True)
def advance(m, t0, step0, n_steps, dt, dx, nu, k, r, amp, omega, comp, scheme, project):
    """Advance ``m`` in place by ``n_steps`` steps.

    Step ``i`` starts at ``t0 + (step0 + i) * dt``.  ``comp`` is the 0-based
    input component, or -1 for no additive input; ``k = 0`` disables the
    feedback.  Returns ``(failed_step, max_norm_deviation)`` where
    ``failed_step`` is -1 on success.
    """
    n = m.shape[0]
    inv_dx2 = 1.0 / (dx * dx)
    k1 = np.empty_like(m)
    k2 = np.empty_like(m)
    k3 = np.empty_like(m)
    k4 = np.empty_like(m)
    tmp = np.empty_like(m)
    max_dev = 0.0
    for s in range(n_steps):
        t = t0 + (step0 + s) * dt
        u0, u1, u2 = _input(t, amp, omega, comp)
        _rhs(m, k1, inv_dx2, nu, k, r, u0, u1, u2)
        if scheme == RK4:
            for j in range(n):
                for c in range(3):
                    tmp[j, c] = m[j, c] + 0.5 * dt * k1[j, c]
            u0, u1, u2 = _input(t + 0.5 * dt, amp, omega, comp)
            _rhs(tmp, k2, inv_dx2, nu, k, r, u0, u1, u2)
            for j in range(n):
                for c in range(3):
                    tmp[j, c] = m[j, c] + 0.5 * dt * k2[j, c]
            _rhs(tmp, k3, inv_dx2, nu, k, r, u0, u1, u2)
            for j in range(n):
                for c in range(3):
                    tmp[j, c] = m[j, c] + dt * k3[j, c]
            u0, u1, u2 = _input(t + dt, amp, omega, comp)
            _rhs(tmp, k4, inv_dx2, nu, k, r, u0, u1, u2)
            for j in range(n):
                for c in range(3):
                    m[j, c] += dt / 6.0 * (k1[j, c] + 2.0 * k2[j, c] + 2.0 * k3[j, c] + k4[j, c])
        else:
            for j in range(n):
                for c in range(3):
                    m[j, c] += dt * k1[j, c]
        for j in range(n):
            nrm = math.sqrt(m[j, 0] * m[j, 0] + m[j, 1] * m[j, 1] + m[j, 2] * m[j, 2])
            if not nrm < 1e150:
                return step0 + s, max_dev
            if project:
                if not nrm >= 1e-8:
                    return step0 + s, max_dev
                m[j, 0] /= nrm
                m[j, 1] /= nrm
                m[j, 2] /= nrm
                nrm = math.sqrt(m[j, 0] * m[j, 0] + m[j, 1] * m[j, 1] + m[j, 2] * m[j, 2])
            dev = abs(nrm - 1.0)
            if dev > max_dev:
                max_dev = dev
    return OK, max_dev
