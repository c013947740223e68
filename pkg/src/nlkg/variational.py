"""Scaling roots, set membership and the scalar inequalities behind blow-up.

Under the scaling u^lam = lam^2 u(lam x) (with alpha = 4 - N):

    M_omega(u^lam) = lam^alpha M_omega(u),  L(u^lam) = lam^(alpha+2) L(u),
    |grad u^lam|^2 = lam^(alpha+2) |grad u|^2,  G(u^lam) = lam^(alpha+2) G(u),

so every functional along the scaling curve is a short sum of powers of
lam.  The closed forms below use only the unscaled quadrature sums.
"""

from dataclasses import dataclass

import numpy as np

from .core import State, _same_grid, scale_state
from .errors import DomainError, NoRootError, PreconditionError
from .functionals import QuadratureSums, _momega, kml, report, variational_suite
from .groundstate import standing_wave

Q_RTOL = 1e-6
# |P_omega| below this fraction of M_omega counts as zero (ground-state accuracy)
P_ZERO_RTOL = 1e-6


def g_function(s, beta):
    """s^b - 1 - b (s - 1) - b (b - 1)/2 s^(b-1) (s - 1)^2."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise DomainError("g is defined for s > 0")
    if not beta > 1:
        raise DomainError("g requires beta > 1")
    val = s**beta - 1 - beta * (s - 1) - 0.5 * beta * (beta - 1) * s ** (beta - 1) * (s - 1) ** 2
    return val if val.ndim else float(val)


def g_scan(beta, npts):
    """(all positive, minimum) of g on the points k/(npts+1), k = 1..npts."""
    if int(npts) != npts or npts < 1:
        raise DomainError("npts must be a positive integer")
    s = np.arange(1, npts + 1) / (npts + 1)
    vals = g_function(s, beta)
    return bool(np.all(vals > 0)), float(vals.min())


def g_positivity_scan(beta, npts):
    return g_scan(beta, npts)[0]


def nehari_root(u, p):
    """Positive root of lam -> K_omega(u^lam) = 2 lam^a M_w + lam^(a+2) (|grad u|^2 - 3G)."""
    q = QuadratureSums.of_pair(*u)
    den = 3 * q.G - sum(q.grad_sq)
    if not den > 0:
        raise NoRootError("3G - |grad u|^2 must be positive for a Nehari root")
    return float(np.sqrt(2 * _momega(q, p) / den))


def pomega_root(u, p):
    """Positive root of lam -> P_omega(u^lam) = a lam^a M_w - (a+2) lam^(a+2) L."""
    J, Mw, Kw, Pw = variational_suite(u, p)
    L = Mw - J
    if not L > 0:
        raise NoRootError("L must be positive for a P_omega root")
    a = p.alpha
    return float(np.sqrt(a * Mw / ((a + 2) * L)))


def j_scaling_curve(u, p, lams):
    """lam^a M_w - lam^(a+2) L along the scaling curve (closed form)."""
    J, Mw, Kw, Pw = variational_suite(u, p)
    L = Mw - J
    a = p.alpha
    lams = np.asarray(lams, dtype=float)
    return lams**a * Mw - lams ** (a + 2) * L


@dataclass(frozen=True)
class VC3Report:
    dM: float
    dL: float

    @property
    def passed(self):
        return bool(self.dM > 0 and self.dL > 0)

    def as_dict(self):
        return {"dM_omega": self.dM, "dL": self.dL, "pass": self.passed}


def check_vc3(u, gs):
    """M_omega(u) - M_omega(phi) and L(u) - L(phi) for a pair with P_omega(u) < 0."""
    p = gs.params
    _same_grid(*u, gs.phi1)
    J, Mw, Kw, Pw = variational_suite(u, p)
    if not Pw < -P_ZERO_RTOL * abs(Mw):
        raise PreconditionError(f"requires P_omega(u) < 0, got {Pw:.3e}", ["P_omega < 0"])
    Jg, Mg, _, _ = variational_suite(gs.u, p)
    return VC3Report(dM=Mw - Mg, dL=(Mw - J) - (Mg - Jg))


@dataclass(frozen=True)
class SetMembership:
    in_A: bool
    in_B: bool
    action_gap: float
    minus_P: float
    energy_gap: float
    charge_gap: float
    minus_H: float
    charge_equal: bool

    def as_dict(self):
        return {
            "in_A": self.in_A,
            "in_B": self.in_B,
            "S_ref_minus_S": self.action_gap,
            "minus_P_omega": self.minus_P,
            "E_ref_minus_E": self.energy_gap,
            "Q_minus_Q_ref": self.charge_gap,
            "minus_H": self.minus_H,
            "Q_equal": self.charge_equal,
        }


def _reference(gs):
    sw = standing_wave(gs)
    return report(sw, gs.params)


def _charge_equal(Q, Qref, rtol=Q_RTOL):
    return abs(Q - Qref) <= rtol * max(abs(Qref), abs(Q))


def membership(s, gs):
    """Test the strict inequalities defining the sets A and B.

    A: S_w(s) < S_w(phi, psi) and P_w(u) < 0.
    B: E(s) < E(phi, psi), Q(s) = Q(phi, psi), H(s) < 0 and P_w(u) < 0.
    """
    _same_grid(s.u1, gs.phi1)
    p = gs.params
    ref = _reference(gs)
    rep = report(s, p)
    q_eq = _charge_equal(rep.Q, ref.Q)
    slack_S = ref.Somega - rep.Somega
    slack_P = -rep.Pomega
    slack_E = ref.E - rep.E
    slack_H = -rep.H
    return SetMembership(
        in_A=bool(slack_S > 0 and slack_P > 0),
        in_B=bool(slack_E > 0 and q_eq and slack_H > 0 and slack_P > 0),
        action_gap=slack_S,
        minus_P=slack_P,
        energy_gap=slack_E,
        charge_gap=rep.Q - ref.Q,
        minus_H=slack_H,
        charge_equal=q_eq,
    )


def f_function(s, p, lam):
    """a (lam^-a + lam^a) K(v) - (a lam^(a+2) - (a+2) lam^a) L(u)."""
    if not lam > 0:
        raise DomainError("lambda must be positive")
    K, _, L = kml(s, p)
    return f_closed_form(K, L, p.alpha, lam)


def f_closed_form(K, L, alpha, lam):
    a = alpha
    return a * (lam**-a + lam**a) * K - (a * lam ** (a + 2) - (a + 2) * lam**a) * L


@dataclass(frozen=True)
class KeyPropositionReport:
    slack: float
    alpha_E_ref: float
    rtol: float = 1e-6

    @property
    def passed(self):
        return bool(self.slack >= -self.rtol * abs(self.alpha_E_ref))

    def as_dict(self):
        return {"slack": self.slack, "alpha_E_ref": self.alpha_E_ref, "pass": self.passed}


def check_key_proposition(s, gs):
    """alpha E(s) - H(s) - alpha E(phi, psi) under H <= 0, equal charge, P_w < 0."""
    _same_grid(s.u1, gs.phi1)
    p = gs.params
    ref = _reference(gs)
    rep = report(s, p)
    failed = []
    if not rep.H <= 0:
        failed.append("H <= 0")
    if not _charge_equal(rep.Q, ref.Q):
        failed.append("Q == Q_ref")
    if not rep.Pomega < 0:
        failed.append("P_omega < 0")
    if failed:
        raise PreconditionError("hypotheses violated: " + ", ".join(failed), failed)
    a = p.alpha
    return KeyPropositionReport(slack=a * rep.E - rep.H - a * ref.E, alpha_E_ref=a * ref.E)


def restore_charge(s, Q_target):
    """Shift v by c (i u1, 2 i u2) so that the charge equals ``Q_target``.

    Q(u, v + c(i u1, 2 i u2)) = Q(u, v) + c (|u1|^2 + 4 |u2|^2), which is
    linear in c.
    """
    q = QuadratureSums.of_state(s)
    Q = q.charge[0] + 2 * q.charge[1]
    denom = q.u_sq[0] + 4 * q.u_sq[1]
    if not denom > 0:
        raise DomainError("cannot adjust the charge of a state with u = 0")
    c = (Q_target - Q) / denom
    return State(s.u1, s.u2, s.v1 + 1j * c * s.u1, s.v2 + 2j * c * s.u2)


def matched_state(u, gs, v=None):
    """A state with L(u') = L(phi) and Q = Q(phi, psi) built from the pair ``u``.

    u is rescaled along u^lam with lam^(alpha+2) L(u) = L(phi); the velocity
    (zero if not given, scaled along with u) is then shifted to restore the
    charge of the standing wave.
    """
    p = gs.params
    Jg, Mg, _, _ = variational_suite(gs.u, p)
    J, Mw, _, _ = variational_suite(u, p)
    L_ref, L = Mg - Jg, Mw - J
    if not (L > 0 and L_ref > 0):
        raise NoRootError("L must be positive to match it by scaling")
    lam = (L_ref / L) ** (1.0 / (p.alpha + 2))
    grid = u[0].grid
    if v is None:
        v = (grid.zeros(), grid.zeros())
    base = State(u[0], u[1], v[0], v[1])
    scaled = scale_state(base, lam)
    return restore_charge(scaled, _reference(gs).Q)


def check_vc4(s, gs, atol=1e-6):
    """E(phi, psi) <= E(s) + atol for a state with matched charge and L."""
    ref = _reference(gs)
    return bool(ref.E <= report(s, gs.params).E + atol)
