"""Pure numpy kernels; reference implementation and fallback for the Cython module."""

import numpy as np


def laplacian(c, f):
    """Apply the banded Laplacian with coefficients ``c`` (shape (5, M)) to ``f``."""
    M = f.shape[0]
    g = np.zeros(M + 4, dtype=f.dtype)
    g[2:-2] = f
    out = c[2] * f
    out += c[0] * g[0:M]
    out += c[1] * g[1 : M + 1]
    out += c[3] * g[3 : M + 3]
    out += c[4] * g[4 : M + 4]
    return out


def accelerations(c, u1, u2, m1sq, m2sq, coupling, a1, a2):
    """Write the right-hand sides of the second-order system into a1, a2."""
    a1[:] = laplacian(c, u1) - m1sq * u1 + coupling * 2.0 * np.conj(u1) * u2
    a2[:] = laplacian(c, u2) - m2sq * u2 + coupling * u1 * u1
    a1[-1] = 0.0
    a2[-1] = 0.0


def verlet_steps(u1, u2, v1, v2, a1, a2, c, dt, m1sq, m2sq, coupling, nsteps):
    """Advance ``nsteps`` kick-drift-kick steps in place.

    On entry a1, a2 must hold the accelerations of the current u; on exit
    they hold those of the new u.
    """
    half = 0.5 * dt
    for _ in range(nsteps):
        v1 += half * a1
        v2 += half * a2
        u1 += dt * v1
        u2 += dt * v2
        accelerations(c, u1, u2, m1sq, m2sq, coupling, a1, a2)
        v1 += half * a1
        v2 += half * a2
