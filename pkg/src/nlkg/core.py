"""Radial discretization of R^N for N in {2, 3}.

Fields are samples of radial profiles on the uniform mesh r_j = j*h,
j = 0..M-1, h = R/(M-1).  The value at r = R is pinned to zero.

The Laplacian is the fourth-order five-point stencil of
f'' + (N-1)/r f' with even reflection at the origin and zero ghost
values beyond R.  The origin rows and the quadrature weights are chosen
together so that the discrete operator is exactly self-adjoint in the
weighted inner product; the Dirichlet form <-Lap f, f> is then the
discrete squared gradient norm.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels_py
from .errors import DomainError, GridMismatchError, ParameterError

SURFACE_AREA = {2: 2.0 * np.pi, 3: 4.0 * np.pi}


@dataclass(frozen=True)
class Params:
    """Masses, frequency and space dimension of the coupled system."""

    m1: float
    m2: float
    omega: float
    dim: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ParameterError(f"dim must be 2 or 3, got {self.dim}")
        if not (self.m1 > 0 and self.m2 > 0):
            raise ParameterError("masses must be positive")
        if not np.isfinite(self.omega):
            raise ParameterError("omega must be finite")
        if self.omega**2 >= min(self.m1**2, self.m2**2 / 4):
            raise ParameterError(
                "standing-wave admissibility requires omega^2 < min(m1^2, m2^2/4); "
                f"got omega^2 = {self.omega**2:g}, "
                f"min(m1^2, m2^2/4) = {min(self.m1**2, self.m2**2 / 4):g}"
            )

    @property
    def mu1(self):
        return self.m1**2 - self.omega**2

    @property
    def mu2(self):
        return self.m2**2 - 4 * self.omega**2

    @property
    def alpha(self):
        return 4 - self.dim


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial mesh on [0, rmax] with ``npts`` nodes."""

    dim: int
    rmax: float
    npts: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ParameterError(f"dim must be 2 or 3, got {self.dim}")
        if not self.rmax > 0:
            raise ParameterError("rmax must be positive")
        if int(self.npts) != self.npts or self.npts < 16:
            raise ParameterError("npts must be an integer >= 16")

    @property
    def h(self):
        return self.rmax / (self.npts - 1)

    @cached_property
    def r(self):
        r = np.arange(self.npts) * self.h
        r[-1] = self.rmax
        r.setflags(write=False)
        return r

    @cached_property
    def weights(self):
        """Quadrature weights for integrals over R^N of radial functions.

        Trapezoid weights sigma_N r^(N-1) h with the end correction
        sigma_2 h^2/12 at the origin for N = 2, which cancels the leading
        error term (the integrand r f(r) has nonzero slope there).
        """
        h = self.h
        sigma = SURFACE_AREA[self.dim]
        w = sigma * self.r ** (self.dim - 1) * h
        w[-1] *= 0.5
        w[0] = sigma * h * h / 12 if self.dim == 2 else 0.0
        w.setflags(write=False)
        return w

    @cached_property
    def stencil(self):
        """Laplacian coefficients, shape (5, M).

        ``stencil[k + 2, j]`` multiplies f[j + k]; entries that would
        reach outside [0, M-1] are zero (ghosts beyond R vanish and the
        reflection f[-k] = f[k] is folded into rows 0 and 1).
        """
        N, h, M = self.dim, self.h, self.npts
        r = self.r.copy()
        r[0] = 1.0
        q = (N - 1) * h / r
        c = np.empty((5, M))
        c[0] = (-1 + q) / (12 * h * h)
        c[1] = (16 - 8 * q) / (12 * h * h)
        c[2] = -30 / (12 * h * h)
        c[3] = (16 + 8 * q) / (12 * h * h)
        c[4] = (-1 - q) / (12 * h * h)
        c[2, 1] += c[0, 1]
        c[0, 1] = 0.0
        c[:, 0] = 0.0
        if N == 2:
            c[2, 0], c[3, 0], c[4, 0] = -7 / h**2, 8 / h**2, -1 / h**2
        else:
            c[2, 0], c[3, 0], c[4, 0] = -7.5 / h**2, 8 / h**2, -0.5 / h**2
        c[3, M - 1] = c[4, M - 1] = c[4, M - 2] = 0.0
        c.setflags(write=False)
        return c

    def field(self, values):
        """Build a Field from an array or a callable of r."""
        if callable(values):
            values = values(self.r)
        return Field(self, values)

    def zeros(self):
        return Field(self, np.zeros(self.npts, dtype=complex))


class Field:
    """Complex samples of a radial profile on a RadialGrid.

    The sample at r = R is forced to zero (homogeneous outer boundary).
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        v = np.array(values, dtype=complex)
        if v.shape == ():
            v = np.full(grid.npts, v, dtype=complex)
        if v.shape != (grid.npts,):
            raise GridMismatchError(
                f"expected {grid.npts} samples, got shape {v.shape}"
            )
        v[-1] = 0.0
        self.grid = grid
        self.values = v

    def __repr__(self):
        return f"Field(grid={self.grid!r}, max|f|={np.abs(self.values).max():.6g})"

    def _other(self, other):
        if isinstance(other, Field):
            _same_grid(self, other)
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._other(other))

    def __mul__(self, other):
        return Field(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def conj(self):
        return Field(self.grid, self.values.conj())

    @property
    def real(self):
        return self.values.real


def _same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridMismatchError(f"fields on different grids: {g} vs {f.grid}")
    return g


@dataclass(frozen=True)
class State:
    """A point (u1, u2, v1, v2) of the energy space."""

    u1: Field
    u2: Field
    v1: Field
    v2: Field

    def __post_init__(self):
        _same_grid(self.u1, self.u2, self.v1, self.v2)

    @property
    def grid(self):
        return self.u1.grid

    @property
    def u(self):
        return (self.u1, self.u2)

    @property
    def v(self):
        return (self.v1, self.v2)

    @classmethod
    def from_arrays(cls, grid, u1, u2, v1, v2):
        return cls(*(Field(grid, a) for a in (u1, u2, v1, v2)))

    @classmethod
    def zeros(cls, grid):
        return cls(grid.zeros(), grid.zeros(), grid.zeros(), grid.zeros())

    def arrays(self):
        return tuple(f.values for f in (self.u1, self.u2, self.v1, self.v2))


def inner(grid, f, g):
    """Re sum W f conj(g) for raw arrays."""
    return float(np.sum(grid.weights * (f * np.conj(g)).real))


def norm_sq(grid, f):
    return float(np.sum(grid.weights * (f.real**2 + f.imag**2)))


def apply_laplacian(grid, f):
    """Five-point radial Laplacian of a raw (real or complex) array."""
    return _kernels_py.laplacian(grid.stencil, f)


def dirichlet_form(grid, f):
    """Discrete ||grad f||^2 = <-Lap f, f>, nonnegative by construction."""
    return -inner(grid, apply_laplacian(grid, f), f)


def radial_derivative_array(grid, f):
    """Fourth-order central d/dr with even reflection at r = 0 and zero ghosts beyond R."""
    g = np.concatenate([f[2:0:-1], f, np.zeros(2, dtype=f.dtype)])
    return (-g[4:] + 8 * g[3:-1] - 8 * g[1:-3] + g[:-4]) / (12 * grid.h)


def l2_inner(f, g):
    """Re of the integral of f conj(g) over R^N."""
    grid = _same_grid(f, g)
    return inner(grid, f.values, g.values)


def laplacian(f):
    return Field(f.grid, apply_laplacian(f.grid, f.values))


def radial_derivative(f):
    return Field(f.grid, radial_derivative_array(f.grid, f.values))


def gradient_norm_sq(f):
    return dirichlet_form(f.grid, f.values)


def h1_norm_sq(f):
    """||f||^2 + ||grad f||^2."""
    return norm_sq(f.grid, f.values) + dirichlet_form(f.grid, f.values)


def interpolate_index(values, s):
    """Cubic Lagrange interpolation of grid samples at fractional indices ``s``.

    Uses the even extension f[-1] = f[1] at the origin and zero beyond the
    last node.  Integer ``s`` reproduces the samples exactly.
    """
    s = np.asarray(s, dtype=float)
    M = len(values)
    ext = np.zeros(M + 3, dtype=values.dtype)
    ext[0] = values[1]
    ext[1 : M + 1] = values
    i = np.clip(np.floor(s).astype(np.int64), 0, M - 1)
    t = s - i
    w_m = -t * (t - 1) * (t - 2) / 6
    w_0 = (t + 1) * (t - 1) * (t - 2) / 2
    w_1 = -(t + 1) * t * (t - 2) / 2
    w_2 = (t + 1) * t * (t - 1) / 6
    out = w_m * ext[i] + w_0 * ext[i + 1] + w_1 * ext[i + 2] + w_2 * ext[i + 3]
    out[s > M - 1] = 0.0
    return out


def resample(f, grid):
    """Interpolate ``f`` onto another radial grid (zero outside its domain)."""
    if grid.dim != f.grid.dim:
        raise GridMismatchError("cannot resample between dimensions")
    if grid == f.grid:
        return Field(grid, f.values)
    return Field(grid, interpolate_index(f.values, grid.r / f.grid.h))


def dilate(f, lam, power):
    """Samples of lam**power * f(lam r) on the same grid."""
    if not lam > 0:
        raise DomainError(f"scaling parameter must be positive, got {lam}")
    if lam == 1:
        return Field(f.grid, f.values)
    s = lam * np.arange(f.grid.npts)
    return Field(f.grid, lam**power * interpolate_index(f.values, s))


def scale_pair(u, lam):
    """Charge-invariant scaling of the field pair, u^lam(x) = lam^2 u(lam x)."""
    return tuple(dilate(f, lam, 2) for f in u)


def scale_state(s, lam):
    """(u^lam, v_lam) with u^lam = lam^2 u(lam x), v_lam = lam^(N-2) v(lam x)."""
    if not lam > 0:
        raise DomainError(f"scaling parameter must be positive, got {lam}")
    N = s.grid.dim
    return State(
        dilate(s.u1, lam, 2),
        dilate(s.u2, lam, 2),
        dilate(s.v1, lam, N - 2),
        dilate(s.v2, lam, N - 2),
    )


def xnorm(s):
    """Energy-space norm: H^1 norms of u plus L^2 norms of v."""
    total = sum(h1_norm_sq(f) for f in s.u)
    total += sum(norm_sq(f.grid, f.values) for f in s.v)
    return float(np.sqrt(total))


def support_radius(s, rel_tol=1e-12):
    """Largest node radius where any component exceeds rel_tol times the global maximum."""
    a = np.max(np.abs(np.vstack(s.arrays())), axis=0)
    peak = a.max()
    if not np.isfinite(peak):
        return float(s.grid.rmax)
    if peak == 0:
        return 0.0
    idx = np.nonzero(a > rel_tol * peak)[0]
    return float(s.grid.r[idx[-1]])
