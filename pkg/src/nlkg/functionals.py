"""Conserved and variational functionals of states and field pairs.

Every functional is a linear combination of a handful of quadrature sums
(the squared norms and Dirichlet forms of each component, the cubic
interaction G and the two charge inner products), computed once per state.
Algebraic relations between the functionals therefore hold to rounding.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .core import Params, _same_grid, dirichlet_form, inner, norm_sq


@dataclass(frozen=True)
class QuadratureSums:
    u_sq: tuple
    grad_sq: tuple
    v_sq: tuple
    G: float
    charge: tuple

    @classmethod
    def of_pair(cls, u1, u2):
        grid = _same_grid(u1, u2)
        a, b = u1.values, u2.values
        return cls(
            u_sq=(norm_sq(grid, a), norm_sq(grid, b)),
            grad_sq=(dirichlet_form(grid, a), dirichlet_form(grid, b)),
            v_sq=(0.0, 0.0),
            G=_interaction(grid, a, b),
            charge=(0.0, 0.0),
        )

    @classmethod
    def of_state(cls, s):
        grid = s.grid
        u1, u2, v1, v2 = s.arrays()
        return cls(
            u_sq=(norm_sq(grid, u1), norm_sq(grid, u2)),
            grad_sq=(dirichlet_form(grid, u1), dirichlet_form(grid, u2)),
            v_sq=(norm_sq(grid, v1), norm_sq(grid, v2)),
            G=_interaction(grid, u1, u2),
            charge=(inner(grid, v1, 1j * u1), inner(grid, v2, 1j * u2)),
        )


def _interaction(grid, u1, u2):
    return inner(grid, u1 * u1, u2)


def interaction_G(u1, u2):
    """Re of the integral of u1^2 conj(u2)."""
    grid = _same_grid(u1, u2)
    return _interaction(grid, u1.values, u2.values)


def _kml(q, p):
    K = 0.5 * (q.v_sq[0] + q.v_sq[1])
    M = 0.5 * (p.m1**2 * q.u_sq[0] + p.m2**2 * q.u_sq[1])
    L = -0.5 * (q.grad_sq[0] + q.grad_sq[1]) + q.G
    return K, M, L


def _momega(q, p):
    return 0.5 * p.mu1 * q.u_sq[0] + 0.5 * p.mu2 * q.u_sq[1]


def charge_Q(s):
    q = QuadratureSums.of_state(s)
    return q.charge[0] + 2 * q.charge[1]


def kml(s, p):
    """(K, M, L): kinetic, mass and potential parts of the energy."""
    return _kml(QuadratureSums.of_state(s), p)


def energy_E(s, p):
    K, M, L = kml(s, p)
    return K + M - L


def dilation_H(s, p):
    """Derivative of E along the charge-invariant scaling at lambda = 1."""
    K, M, L = kml(s, p)
    a = p.alpha
    return -a * K + a * M - (a + 2) * L


def variational_suite(u, p):
    """(J_omega, M_omega, K_omega, P_omega) of a field pair."""
    q = QuadratureSums.of_pair(*u)
    return _variational(q, p)


def _variational(q, p):
    Mw = _momega(q, p)
    L = -0.5 * (q.grad_sq[0] + q.grad_sq[1]) + q.G
    J = Mw - L
    Kw = 2 * Mw + q.grad_sq[0] + q.grad_sq[1] - 3 * q.G
    Pw = p.alpha * Mw - (p.alpha + 2) * L
    return J, Mw, Kw, Pw


def action_S(s, p):
    return energy_E(s, p) - p.omega * charge_Q(s)


def action_decomposition(s, p):
    """J_omega(u) + |v1 - i w u1|^2/2 + |v2 - 2 i w u2|^2/2, evaluated from the fields."""
    grid = s.grid
    u1, u2, v1, v2 = s.arrays()
    w = p.omega
    J = variational_suite(s.u, p)[0]
    return (
        J
        + 0.5 * norm_sq(grid, v1 - 1j * w * u1)
        + 0.5 * norm_sq(grid, v2 - 2j * w * u2)
    )


@dataclass(frozen=True)
class FunctionalReport:
    E: float
    Q: float
    G: float
    K: float
    M: float
    L: float
    H: float
    Jomega: float
    Momega: float
    Komega_nehari: float
    Pomega: float
    Somega: float
    params: Params

    _JSON_KEYS = (
        ("E", "E"),
        ("Q", "Q"),
        ("G", "G"),
        ("K", "K"),
        ("M", "M"),
        ("L", "L"),
        ("H", "H"),
        ("J_omega", "Jomega"),
        ("M_omega", "Momega"),
        ("K_omega", "Komega_nehari"),
        ("P_omega", "Pomega"),
        ("S_omega", "Somega"),
    )

    def as_dict(self):
        """Flat mapping with the external key names."""
        return {k: float(getattr(self, attr)) for k, attr in self._JSON_KEYS}

    def params_dict(self):
        return asdict(self.params)


def report(s, p):
    """Evaluate every functional of ``s`` from one set of quadrature sums."""
    q = QuadratureSums.of_state(s)
    K, M, L = _kml(q, p)
    a = p.alpha
    E = K + M - L
    Q = q.charge[0] + 2 * q.charge[1]
    J, Mw, Kw, Pw = _variational(q, p)
    return FunctionalReport(
        E=E,
        Q=Q,
        G=q.G,
        K=K,
        M=M,
        L=L,
        H=-a * K + a * M - (a + 2) * L,
        Jomega=J,
        Momega=Mw,
        Komega_nehari=Kw,
        Pomega=Pw,
        Somega=E - p.omega * Q,
        params=p,
    )


def xnorm_from_sums(q):
    return float(np.sqrt(sum(q.u_sq) + sum(q.grad_sq) + sum(q.v_sq)))
