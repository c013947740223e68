"""Localized virial quantity and the check of its time derivative against H.

Cutoff profile: Phi(t) = N on [0, 1], N (1 - 3 tau^2 + 2 tau^3) with
tau = t - 1 on [1, 2], 0 beyond; Phi_rho(r) = Phi(r / rho) and
Psi_rho(r) = r^(1-N) * integral_0^r Phi_rho(s) s^(N-1) ds.

I_rho(u, v) = sum_j Re int [Psi_rho d_r u_j conj(v_j) + (Phi_rho + 4 - N)/2 u_j conj(v_j)].
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .core import inner, radial_derivative_array
from .errors import DomainError, GridMismatchError, InsufficientDataError, PreconditionError


def cutoff_profile(t, dim):
    """Phi on the unit scale."""
    t = np.asarray(t, dtype=float)
    tau = np.clip(t - 1.0, 0.0, 1.0)
    return dim * (1.0 - 3.0 * tau**2 + 2.0 * tau**3)


def psi_profile(r, rho, dim):
    """Psi_rho by exact integration of the piecewise polynomial Phi_rho(s) s^(N-1)."""
    r = np.asarray(r, dtype=float)
    s = Polynomial([0.0, 1.0])
    tau = s / rho - 1.0
    antider = (dim * (1 - 3 * tau**2 + 2 * tau**3) * s ** (dim - 1)).integ()
    base = rho**dim - antider(rho)
    out = np.array(r, copy=True)
    outer = r > rho
    ro = r[outer]
    out[outer] = (base + antider(np.minimum(ro, 2 * rho))) / ro ** (dim - 1)
    return out


@dataclass(frozen=True)
class VirialCutoff:
    rho: float
    grid: object
    phi_rho: np.ndarray
    psi_rho: np.ndarray


def make_cutoff(rho, grid):
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    phi = cutoff_profile(grid.r / rho, grid.dim)
    psi = psi_profile(grid.r, rho, grid.dim)
    phi.setflags(write=False)
    psi.setflags(write=False)
    return VirialCutoff(rho=float(rho), grid=grid, phi_rho=phi, psi_rho=psi)


def I_rho(s, cutoff):
    grid = s.grid
    if cutoff.grid != grid:
        raise GridMismatchError("cutoff and state live on different grids")
    weight = 0.5 * (cutoff.phi_rho + 4 - grid.dim)
    total = 0.0
    for u, v in ((s.u1, s.v1), (s.u2, s.v2)):
        du = radial_derivative_array(grid, u.values)
        total += inner(grid, cutoff.psi_rho * du + weight * u.values, v.values)
    return total


def time_derivative(t, y):
    """Central differences on recorded values.

    With at least five uniformly spaced records the five-point (fourth
    order) formula is used at records 2..n-3; otherwise the three-point
    formula at records 1..n-2.  Returns (t_used, dy/dt, index_used).
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(t)
    if n < 3:
        raise InsufficientDataError("need at least 3 records")
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise InsufficientDataError("record times must be strictly increasing")
    step = dt.mean()
    if n >= 5 and np.allclose(dt, step, rtol=1e-9, atol=0):
        d = (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * step)
        idx = np.arange(2, n - 2)
    else:
        d = (y[2:] - y[:-2]) / (t[2:] - t[:-2])
        idx = np.arange(1, n - 1)
    return t[idx], d, idx


@dataclass(frozen=True)
class VirialCheckReport:
    max_rel_deviation: float
    max_abs_deviation: float
    rho: float
    support_radius: float
    t_checked: float
    n_points: int
    tol: float

    @property
    def passed(self):
        return bool(self.max_rel_deviation <= self.tol)

    def as_dict(self):
        return {
            "max_rel_deviation": self.max_rel_deviation,
            "rho": self.rho,
            "support_radius": self.support_radius,
            "pass": self.passed,
            "max_abs_deviation": self.max_abs_deviation,
            "t_checked": self.t_checked,
            "n_points": self.n_points,
        }


def check_virial_identity(
    records,
    rho,
    support_radius,
    t_final=None,
    t_window=None,
    tol=1e-2,
    energy_gate=1e-2,
):
    """Compare -dI_rho/dt with H along recorded data.

    ``records`` is an EvolveResult or a sequence of TrajectoryRecord.  Only
    the resolved part of the trajectory is used: records stop at the first
    one whose energy deviates from E(0) by more than ``energy_gate``
    (relative), since past that point the discrete solution no longer
    follows the continuous flow the identity describes.  Records must be
    evenly spaced; the scan also stops at the first irregular spacing.
    ``t_window`` optionally limits the check to t <= t_window.

    The deviation is max |-dI/dt - H| / max |H| over the interior records
    (zero when H vanishes identically).
    """
    if hasattr(records, "records"):
        t_final = records.t_final if t_final is None else t_final
        records = records.finite_records()
    records = list(records)
    if len(records) < 3:
        raise InsufficientDataError("need at least 3 records")
    if t_final is None:
        t_final = records[-1].t
    if rho < support_radius + t_final:
        raise PreconditionError(
            f"rho = {rho:g} < support_radius + t_final = {support_radius + t_final:g}",
            failed=["rho >= support_radius + t_final"],
        )
    E0 = records[0].E
    scale = abs(E0) if E0 != 0 else 1.0
    used = []
    spacing = records[1].t - records[0].t
    for rec in records:
        if t_window is not None and rec.t > t_window + 1e-12:
            break
        if not rec.is_finite() or abs(rec.E - E0) > energy_gate * scale:
            break
        # an off-stride closing record (end of run, blow-up replay) is dropped
        if used and abs((rec.t - used[-1].t) - spacing) > 1e-9 * spacing:
            break
        used.append(rec)
    if len(used) < 3:
        raise InsufficientDataError("fewer than 3 resolved records")
    t = np.array([rec.t for rec in used])
    I = np.array([rec.I_rho for rec in used])
    H = np.array([rec.H for rec in used])
    if not np.all(np.isfinite(I)):
        raise InsufficientDataError("trajectory was recorded without I_rho")
    _, dI, idx = time_derivative(t, I)
    dev = np.abs(-dI - H[idx])
    hmax = np.max(np.abs(H[idx]))
    rel = float(dev.max() / hmax) if hmax > 0 else 0.0
    if hmax == 0 and dev.max() > 0:
        rel = float("inf")
    return VirialCheckReport(
        max_rel_deviation=rel,
        max_abs_deviation=float(dev.max()),
        rho=float(rho),
        support_radius=float(support_radius),
        t_checked=float(t[-1]),
        n_points=len(dev),
        tol=tol,
    )
