"""Radial ground states of the stationary coupled system

    -Lap phi1 + mu1 phi1 = 2 phi1 phi2,
    -Lap phi2 + mu2 phi2 = phi1^2,

by a Petviashvili iteration with one stabilizing factor per component.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .core import Field, RadialGrid, State, apply_laplacian, norm_sq
from .errors import ConvergenceError, DegenerateIterateError, DomainError
from .functionals import kml, variational_suite


@dataclass(frozen=True)
class GroundState:
    phi1: Field
    phi2: Field
    params: object
    residual: float
    iterations: int

    @property
    def grid(self):
        return self.phi1.grid

    @property
    def u(self):
        return (self.phi1, self.phi2)


def _banded_operator(grid, mu):
    """(-Lap + mu) on the unknown nodes 0..M-2 in LAPACK banded storage."""
    c = grid.stencil
    n = grid.npts - 1
    ab = np.zeros((5, n))
    for k in range(-2, 3):
        a = -c[k + 2, :n].copy()
        if k == 0:
            a += mu
        # A[i, i+k] is stored at ab[2 - k, i + k]
        if k >= 0:
            ab[2 - k, k:] = a[: n - k]
        else:
            ab[2 - k, : n + k] = a[-k:]
    return ab


class _Helmholtz:
    def __init__(self, grid, mu):
        self.ab = _banded_operator(grid, mu)
        self.n = grid.npts - 1

    def solve(self, rhs):
        out = np.zeros(self.n + 1)
        out[:-1] = solve_banded((2, 2), self.ab, rhs[:-1], check_finite=False)
        return out


def _wip(w, a, b):
    return float(np.sum(w * a * b))


def sp_residual(grid, p, phi1, phi2):
    """Relative residual of the stationary system on the unknown nodes."""
    w = grid.weights[:-1]
    r1 = -apply_laplacian(grid, phi1) + p.mu1 * phi1 - 2 * phi1 * phi2
    r2 = -apply_laplacian(grid, phi2) + p.mu2 * phi2 - phi1 * phi1
    num = np.sqrt(np.sum(w * r1[:-1] ** 2)) + np.sqrt(np.sum(w * r2[:-1] ** 2))
    den = p.mu1 * np.sqrt(norm_sq(grid, phi1)) + p.mu2 * np.sqrt(norm_sq(grid, phi2))
    return float(num / den) if den > 0 else float("inf")


def default_initial_guess(grid, p):
    A = max(p.mu1, p.mu2)
    r = grid.r
    return A * np.exp(-p.mu1 * r**2 / 4), A * np.exp(-p.mu2 * r**2 / 4)


def solve_sp(p, grid, tol=1e-10, max_iter=2000, init=None):
    """Petviashvili iteration for the coupled stationary problem.

    Each component gets its own stabilizing factor
    S_j = <(-Lap + mu_j) phi_j, phi_j> / <N_j, phi_j>. The update
    phi1 <- S1^(3/2) S2^(1/2) (-Lap + mu1)^-1 N1,
    phi2 <- S1 S2 (-Lap + mu2)^-1 N2
    fixes the two independent amplitude modes of the quadratic
    nonlinearity (a plain S^2 factor leaves a period-two oscillation
    between the components).
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    if init is None:
        init = default_initial_guess(grid, p)
    phi1 = np.array(np.real(init[0]), dtype=float)
    phi2 = np.array(np.real(init[1]), dtype=float)
    phi1[-1] = phi2[-1] = 0.0
    w = grid.weights
    op1 = _Helmholtz(grid, p.mu1)
    op2 = _Helmholtz(grid, p.mu2)
    residual = np.inf
    for it in range(1, max_iter + 1):
        n1 = 2 * phi1 * phi2
        n2 = phi1 * phi1
        l1 = -apply_laplacian(grid, phi1) + p.mu1 * phi1
        l2 = -apply_laplacian(grid, phi2) + p.mu2 * phi2
        d1, d2 = _wip(w, n1, phi1), _wip(w, n2, phi2)
        if not (d1 > 0 and d2 > 0):
            raise DegenerateIterateError(
                "stabilizing factor has nonpositive denominator", residual, it
            )
        s1 = _wip(w, l1, phi1) / d1
        s2 = _wip(w, l2, phi2) / d2
        if not (s1 > 0 and s2 > 0) or not np.isfinite(s1 * s2):
            raise DegenerateIterateError(
                f"nonpositive stabilizing factor ({s1:g}, {s2:g})", residual, it
            )
        q1 = op1.solve(n1) * (s1**1.5 * s2**0.5)
        q2 = op2.solve(n2) * (s1 * s2)
        change = np.sqrt(_wip(w, q1 - phi1, q1 - phi1) + _wip(w, q2 - phi2, q2 - phi2))
        size = np.sqrt(_wip(w, q1, q1) + _wip(w, q2, q2))
        phi1, phi2 = q1, q2
        if change <= tol * size:
            residual = sp_residual(grid, p, phi1, phi2)
            if residual <= tol:
                return _pack(grid, p, phi1, phi2, residual, it)
    residual = sp_residual(grid, p, phi1, phi2)
    raise ConvergenceError(
        f"no convergence after {max_iter} iterations (residual {residual:.3e})",
        residual,
        max_iter,
    )


def _pack(grid, p, phi1, phi2, residual, iterations):
    return GroundState(
        phi1=Field(grid, phi1),
        phi2=Field(grid, phi2),
        params=p,
        residual=residual,
        iterations=iterations,
    )


def solve_scalar(mu, grid, tol=1e-10, max_iter=2000):
    """Positive radial solution of -Lap w + mu w = w^2 (plain Petviashvili, exponent 2)."""
    w = grid.weights
    op = _Helmholtz(grid, mu)
    r = grid.r
    f = 1.5 * mu * np.exp(-mu * r**2 / 4)
    f[-1] = 0.0
    for _ in range(max_iter):
        nl = f * f
        s = _wip(w, -apply_laplacian(grid, f) + mu * f, f) / _wip(w, nl, f)
        if not s > 0:
            raise DegenerateIterateError("nonpositive stabilizing factor")
        g = op.solve(nl) * s**2
        change = np.sqrt(_wip(w, g - f, g - f) / _wip(w, g, g))
        f = g
        if change <= tol:
            res = -apply_laplacian(grid, f) + mu * f - f * f
            rel = np.sqrt(np.sum(w[:-1] * res[:-1] ** 2)) / (mu * np.sqrt(_wip(w, f, f)))
            if rel <= tol:
                return Field(grid, f)
    raise ConvergenceError("scalar iteration did not converge")


def polish(gs, grid, tol=1e-10, max_iter=2000):
    """Re-solve on ``grid`` starting from the interpolated profile of ``gs``.

    A profile moved between grids solves the discrete system only up to
    interpolation error; the mismatch acts as a seed for the unstable
    mode in long time integrations.
    """
    from .core import resample

    start = (resample(gs.phi1, grid).values.real, resample(gs.phi2, grid).values.real)
    return solve_sp(gs.params, grid, tol=tol, max_iter=max_iter, init=start)


def standing_wave(gs):
    """(phi1, phi2, i w phi1, 2 i w phi2)."""
    w = gs.params.omega
    return State(gs.phi1, gs.phi2, 1j * w * gs.phi1, 2j * w * gs.phi2)


@dataclass(frozen=True)
class Blowup2Report:
    i: float
    ii: float
    iii: float
    alpha: int

    @property
    def rel_gap_i_ii(self):
        return abs(self.i + self.alpha * self.ii) / max(abs(self.i), abs(self.alpha * self.ii))

    @property
    def rel_gap_i_iii(self):
        return abs(self.i + 2 * self.iii) / max(abs(self.i), abs(2 * self.iii))

    def as_dict(self):
        return {"blowup2_i": self.i, "blowup2_ii": self.ii, "blowup2_iii": self.iii}


def check_blowup2(gs):
    """Three equivalent forms of the second scaling derivative of the energy.

    (i)   alpha(alpha+1) K(psi) + alpha(alpha-1) M(phi) - (alpha+1)(alpha+2) L(phi)
    (ii)  (m1^2 - (5-N) w^2) |phi1|^2 + (m2^2 - 4(5-N) w^2) |phi2|^2
    (iii) (alpha+2) L(phi) - alpha^2 K(psi)
    """
    p = gs.params
    a, N, w = p.alpha, p.dim, p.omega
    K, M, L = kml(standing_wave(gs), p)
    grid = gs.grid
    n1 = norm_sq(grid, gs.phi1.values)
    n2 = norm_sq(grid, gs.phi2.values)
    i = a * (a + 1) * K + a * (a - 1) * M - (a + 1) * (a + 2) * L
    ii = (p.m1**2 - (5 - N) * w**2) * n1 + (p.m2**2 - 4 * (5 - N) * w**2) * n2
    iii = (a + 2) * L - a * a * K
    return Blowup2Report(i=i, ii=ii, iii=iii, alpha=a)


def sc1_holds(p):
    """(5 - N) w^2 <= min(m1^2, m2^2 / 4)."""
    return (5 - p.dim) * p.omega**2 <= min(p.m1**2, p.m2**2 / 4)


def sc2_holds(gs):
    return check_blowup2(gs).ii >= 0


def random_initial_guesses(grid, p, count, seed=42):
    """Positive Gaussian superpositions with random widths and amplitudes."""
    rng = np.random.default_rng(seed)
    r = grid.r
    out = []
    scale = max(p.mu1, p.mu2)
    for _ in range(count):
        pair = []
        for mu in (p.mu1, p.mu2):
            f = np.zeros_like(r)
            for _ in range(int(rng.integers(1, 4))):
                amp = scale * rng.uniform(0.3, 2.0)
                width = mu * rng.uniform(0.1, 1.0)
                f += amp * np.exp(-width * r**2)
            pair.append(f)
        out.append(tuple(pair))
    return out


def multi_start(p, grid, count=3, seed=42, tol=1e-10, max_iter=2000):
    """Solve from several random positive initial guesses.

    Returns the converged ground states; failures are skipped.
    """
    results = []
    for init in random_initial_guesses(grid, p, count, seed):
        try:
            results.append(solve_sp(p, grid, tol=tol, max_iter=max_iter, init=init))
        except ConvergenceError:
            continue
    return results


def action(gs):
    return variational_suite(gs.u, gs.params)[0]


def ground_state_summary(gs):
    """Flat dictionary used by the CLI report."""
    p = gs.params
    J, Mw, Kw, Pw = variational_suite(gs.u, p)
    K, M, L = kml(standing_wave(gs), p)
    b = check_blowup2(gs)
    out = {
        "residual": gs.residual,
        "iterations": gs.iterations,
        "J_omega": J,
        "M_omega": Mw,
        "L": L,
        "K_psi": K,
    }
    out.update(b.as_dict())
    out["sc1_satisfied"] = bool(sc1_holds(p))
    out["sc2_satisfied"] = bool(b.ii >= 0)
    return out


__all__ = [
    "Blowup2Report",
    "GroundState",
    "RadialGrid",
    "action",
    "check_blowup2",
    "ground_state_summary",
    "multi_start",
    "polish",
    "sc1_holds",
    "sc2_holds",
    "solve_scalar",
    "solve_sp",
    "sp_residual",
    "standing_wave",
]
