"""Explicit time integration of the coupled Klein-Gordon system

    u1_tt - Lap u1 + m1^2 u1 = 2 conj(u1) u2,
    u2_tt - Lap u2 + m2^2 u2 = u1^2.

The integrator is Stormer-Verlet.  ``step_leapfrog`` exposes the two-level
form u^{n+1} = 2u^n - u^{n-1} + dt^2 F(u^n); ``evolve`` runs the equivalent
kick-drift-kick form through the compiled kernel, which produces the same
u-layers and carries the velocity explicitly.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _backend
from .core import Field, State, _same_grid
from .errors import NumericalFailure, ParameterError
from .functionals import QuadratureSums, _kml, _variational, xnorm_from_sums

# a non-finite record after the norm has at least doubled counts as blow-up
_GROWTH_BEFORE_OVERFLOW = 2.0


class Outcome(str, Enum):
    COMPLETED = "completed"
    BLOWUP = "blowup_detected"
    FAILURE = "numerical_failure"


@dataclass(frozen=True)
class EvolveConfig:
    dt: float
    t_end: float
    record_every: int = 1
    blowup_factor: float = 1e4
    cfl_limit: float = 0.5
    coupling: float = 1.0

    def __post_init__(self):
        if not (self.dt > 0 and self.t_end > 0):
            raise ParameterError("dt and t_end must be positive")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ParameterError("record_every must be an integer >= 1")
        if not self.blowup_factor > 1:
            raise ParameterError("blowup_factor must exceed 1")

    def check_cfl(self, grid):
        if self.dt > self.cfl_limit * grid.h * (1 + 1e-12):
            raise ParameterError(
                f"dt = {self.dt:g} violates dt <= cfl_limit*h = {self.cfl_limit * grid.h:g}"
            )


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    E: float
    Q: float
    H: float
    P_omega: float
    S_omega: float
    xnorm: float
    I_rho: float = float("nan")

    FIELDS = ("t", "E", "Q", "H", "P_omega", "S_omega", "xnorm", "I_rho")

    def as_row(self):
        return tuple(getattr(self, k) for k in self.FIELDS)

    def is_finite(self):
        return all(np.isfinite(getattr(self, k)) for k in self.FIELDS[:-1])


@dataclass
class EvolveResult:
    records: list
    outcome: Outcome
    t_final: float
    final_state: State = None
    rho: float = None
    notes: list = field(default_factory=list)

    def finite_records(self):
        return [rec for rec in self.records if rec.is_finite() and rec.t <= self.t_final]

    def _drift(self, key):
        recs = self.finite_records()
        if not recs:
            return float("nan")
        x0 = getattr(recs[0], key)
        dev = max(abs(getattr(rec, key) - x0) for rec in recs)
        return dev / abs(x0) if x0 != 0 else dev

    @property
    def drift_E(self):
        """max |E(t) - E(0)| / |E(0)| over finite records (absolute if E(0) = 0)."""
        return self._drift("E")

    @property
    def drift_Q(self):
        return self._drift("Q")

    @property
    def max_xnorm(self):
        recs = self.finite_records()
        return max(rec.xnorm for rec in recs) if recs else float("nan")

    def summary(self):
        return {
            "outcome": self.outcome.value,
            "t_final": self.t_final,
            "max_xnorm": self.max_xnorm,
            "drift_E": self.drift_E,
            "drift_Q": self.drift_Q,
        }


def _rhs_arrays(grid, p, u1, u2, coupling=1.0):
    a1 = np.empty(grid.npts, dtype=complex)
    a2 = np.empty(grid.npts, dtype=complex)
    _backend.accelerations(
        grid.stencil,
        np.ascontiguousarray(u1, dtype=complex),
        np.ascontiguousarray(u2, dtype=complex),
        p.m1**2,
        p.m2**2,
        coupling,
        a1,
        a2,
    )
    return a1, a2


def rhs(s, p, coupling=1.0):
    """(Lap u1 - m1^2 u1 + 2 conj(u1) u2, Lap u2 - m2^2 u2 + u1^2)."""
    a1, a2 = _rhs_arrays(s.grid, p, s.u1.values, s.u2.values, coupling)
    return Field(s.grid, a1), Field(s.grid, a2)


def bootstrap_previous(s0, p, dt, coupling=1.0):
    """u^{-1} = u^0 - dt v^0 + dt^2/2 F(u^0)."""
    f1, f2 = rhs(s0, p, coupling)
    return (
        s0.u1 - dt * s0.v1 + (0.5 * dt * dt) * f1,
        s0.u2 - dt * s0.v2 + (0.5 * dt * dt) * f2,
    )


def step_leapfrog(u_prev, u_cur, p, dt, coupling=1.0):
    """One two-level step: returns u^{n+1} = 2u^n - u^{n-1} + dt^2 F(u^n)."""
    grid = _same_grid(*u_prev, *u_cur)
    a1, a2 = _rhs_arrays(grid, p, u_cur[0].values, u_cur[1].values, coupling)
    with np.errstate(all="ignore"):
        n1 = 2 * u_cur[0].values - u_prev[0].values + dt * dt * a1
        n2 = 2 * u_cur[1].values - u_prev[1].values + dt * dt * a2
    if not (np.all(np.isfinite(n1)) and np.all(np.isfinite(n2))):
        raise NumericalFailure("non-finite values in leapfrog step")
    return Field(grid, n1), Field(grid, n2)


def leapfrog_velocity(u_prev, u_next, dt):
    """Centered velocity (u^{n+1} - u^{n-1}) / (2 dt)."""
    return tuple((b - a) * (0.5 / dt) for a, b in zip(u_prev, u_next))


def _record(t, grid, p, arrays, cutoff):
    s = State.from_arrays(grid, *arrays)
    q = QuadratureSums.of_state(s)
    K, M, L = _kml(q, p)
    a = p.alpha
    E = K + M - L
    Q = q.charge[0] + 2 * q.charge[1]
    Pw = _variational(q, p)[3]
    I = float("nan")
    if cutoff is not None:
        from .virial import I_rho

        I = I_rho(s, cutoff)
    return TrajectoryRecord(
        t=t,
        E=E,
        Q=Q,
        H=-a * K + a * M - (a + 2) * L,
        P_omega=Pw,
        S_omega=E - p.omega * Q,
        xnorm=xnorm_from_sums(q),
        I_rho=I,
    )


def evolve(s0, p, cfg, rho=None, sink=None):
    """Integrate from ``s0`` to ``cfg.t_end`` or until blow-up.

    A record is taken at t = 0, every ``record_every`` steps and at the
    last step.  The run stops as blow-up when the X-norm reaches
    ``blowup_factor`` times its initial value, or when non-finite values
    appear after the norm has grown; non-finite values without growth end
    the run as a numerical failure.  ``sink`` (if given) receives every
    record as it is produced.  Near blow-up the grid under-resolves the
    solution, so ``t_final`` is an indicator rather than a converged
    blow-up time.
    """
    grid = s0.grid
    if grid.dim != p.dim:
        raise ParameterError("state grid dimension does not match params")
    cfg.check_cfl(grid)
    cutoff = None
    if rho is not None:
        from .virial import make_cutoff

        cutoff = make_cutoff(rho, grid)

    u1, u2, v1, v2 = (np.array(a, dtype=complex) for a in s0.arrays())
    a1, a2 = _rhs_arrays(grid, p, u1, u2, cfg.coupling)
    nsteps = int(round(cfg.t_end / cfg.dt))
    stride = int(cfg.record_every)

    records = []

    def emit(rec):
        records.append(rec)
        if sink is not None:
            sink(rec)

    first = _record(0.0, grid, p, (u1, u2, v1, v2), cutoff)
    emit(first)
    x0 = first.xnorm
    threshold = cfg.blowup_factor * x0 if x0 > 0 else np.inf
    last_finite = first
    n = 0
    outcome = Outcome.COMPLETED
    bufs = (u1, u2, v1, v2, a1, a2)
    args = (grid.stencil, cfg.dt, p.m1**2, p.m2**2, cfg.coupling)
    while n < nsteps:
        chunk = min(stride, nsteps - n)
        saved = [b.copy() for b in bufs]
        _backend.verlet_steps(*bufs, *args, chunk)
        with np.errstate(all="ignore"):
            rec = _record((n + chunk) * cfg.dt, grid, p, bufs[:4], cutoff)
        if chunk > 1 and (not rec.is_finite() or rec.xnorm >= threshold):
            # replay the chunk step by step to catch the first crossing
            for b, c in zip(bufs, saved):
                b[:] = c
            for k in range(1, chunk + 1):
                _backend.verlet_steps(*bufs, *args, 1)
                with np.errstate(all="ignore"):
                    rec = _record((n + k) * cfg.dt, grid, p, bufs[:4], cutoff)
                if not rec.is_finite() or rec.xnorm >= threshold:
                    break
            n += k
        else:
            n += chunk
        emit(rec)
        if not rec.is_finite():
            grew = x0 > 0 and last_finite.xnorm >= _GROWTH_BEFORE_OVERFLOW * x0
            outcome = Outcome.BLOWUP if grew else Outcome.FAILURE
            break
        last_finite = rec
        if rec.xnorm >= threshold:
            outcome = Outcome.BLOWUP
            break

    final = None
    if outcome is not Outcome.FAILURE and last_finite is records[-1]:
        final = State.from_arrays(grid, u1, u2, v1, v2)
    return EvolveResult(
        records=records,
        outcome=outcome,
        t_final=last_finite.t,
        final_state=final,
        rho=rho,
    )
