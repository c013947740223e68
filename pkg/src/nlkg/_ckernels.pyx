# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in ``_kernels_py``.

Same signatures and results (up to floating-point association order).
Complex arrays are processed as interleaved float64 (re, im) pairs.  The
loops release the GIL so independent runs can proceed in threads.
"""

import numpy as np


cdef inline double _lap(const double* c0, const double* c1, const double* c2,
                        const double* c3, const double* c4, const double* f,
                        Py_ssize_t j, Py_ssize_t M, int k) noexcept nogil:
    # edge nodes: zero ghosts outside [0, M)
    cdef double s = c2[j] * f[2 * j + k]
    if j >= 2:
        s += c0[j] * f[2 * (j - 2) + k]
    if j >= 1:
        s += c1[j] * f[2 * (j - 1) + k]
    if j + 1 < M:
        s += c3[j] * f[2 * (j + 1) + k]
    if j + 2 < M:
        s += c4[j] * f[2 * (j + 2) + k]
    return s


cdef void _lap_all(const double[:, ::1] c, const double* f, double* out,
                   Py_ssize_t M) noexcept nogil:
    cdef const double* c0 = &c[0, 0]
    cdef const double* c1 = &c[1, 0]
    cdef const double* c2 = &c[2, 0]
    cdef const double* c3 = &c[3, 0]
    cdef const double* c4 = &c[4, 0]
    cdef Py_ssize_t j, lo = 2, hi = M - 2
    cdef int k
    if hi < lo:
        hi = lo
    for j in range(min(lo, M)):
        for k in range(2):
            out[2 * j + k] = _lap(c0, c1, c2, c3, c4, f, j, M, k)
    for j in range(lo, hi):
        out[2 * j] = (c0[j] * f[2 * j - 4] + c1[j] * f[2 * j - 2] + c2[j] * f[2 * j]
                      + c3[j] * f[2 * j + 2] + c4[j] * f[2 * j + 4])
        out[2 * j + 1] = (c0[j] * f[2 * j - 3] + c1[j] * f[2 * j - 1] + c2[j] * f[2 * j + 1]
                          + c3[j] * f[2 * j + 3] + c4[j] * f[2 * j + 5])
    for j in range(hi, M):
        for k in range(2):
            out[2 * j + k] = _lap(c0, c1, c2, c3, c4, f, j, M, k)


cdef void _acc(const double[:, ::1] c, const double* u1, const double* u2,
               double m1sq, double m2sq, double coupling,
               double* a1, double* a2, Py_ssize_t M) noexcept nogil:
    cdef Py_ssize_t j
    cdef double x, y, p, q
    _lap_all(c, u1, a1, M)
    _lap_all(c, u2, a2, M)
    for j in range(M - 1):
        x = u1[2 * j]
        y = u1[2 * j + 1]
        p = u2[2 * j]
        q = u2[2 * j + 1]
        # 2 conj(u1) u2 and u1^2
        a1[2 * j] += -m1sq * x + coupling * 2.0 * (x * p + y * q)
        a1[2 * j + 1] += -m1sq * y + coupling * 2.0 * (x * q - y * p)
        a2[2 * j] += -m2sq * p + coupling * (x * x - y * y)
        a2[2 * j + 1] += -m2sq * q + coupling * 2.0 * x * y
    for j in range(2 * (M - 1), 2 * M):
        a1[j] = 0.0
        a2[j] = 0.0


cdef inline double[::1] _flat(a):
    return a.view(np.float64)


def laplacian(c, f):
    cdef const double[:, ::1] cc = np.ascontiguousarray(c, dtype=np.float64)
    src = np.ascontiguousarray(f)
    is_real = not np.iscomplexobj(src)
    src = np.ascontiguousarray(src, dtype=np.complex128)
    cdef Py_ssize_t M = src.shape[0]
    out = np.empty(M, dtype=np.complex128)
    cdef const double[::1] ff = src.view(np.float64)
    cdef double[::1] o = out.view(np.float64)
    if M:
        with nogil:
            _lap_all(cc, &ff[0], &o[0], M)
    return out.real.copy() if is_real else out


def accelerations(c, u1, u2, double m1sq, double m2sq, double coupling, a1, a2):
    cdef const double[:, ::1] cc = np.ascontiguousarray(c, dtype=np.float64)
    cdef const double[::1] x1 = np.ascontiguousarray(u1, dtype=np.complex128).view(np.float64)
    cdef const double[::1] x2 = np.ascontiguousarray(u2, dtype=np.complex128).view(np.float64)
    cdef double[::1] b1 = _flat(a1)
    cdef double[::1] b2 = _flat(a2)
    cdef Py_ssize_t M = x1.shape[0] // 2
    with nogil:
        _acc(cc, &x1[0], &x2[0], m1sq, m2sq, coupling, &b1[0], &b2[0], M)


def verlet_steps(u1, u2, v1, v2, a1, a2, c, double dt, double m1sq,
                 double m2sq, double coupling, Py_ssize_t nsteps):
    cdef const double[:, ::1] cc = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[::1] U1 = _flat(u1)
    cdef double[::1] U2 = _flat(u2)
    cdef double[::1] V1 = _flat(v1)
    cdef double[::1] V2 = _flat(v2)
    cdef double[::1] A1 = _flat(a1)
    cdef double[::1] A2 = _flat(a2)
    cdef double* pu1 = &U1[0]
    cdef double* pu2 = &U2[0]
    cdef double* pv1 = &V1[0]
    cdef double* pv2 = &V2[0]
    cdef double* pa1 = &A1[0]
    cdef double* pa2 = &A2[0]
    cdef Py_ssize_t M = U1.shape[0] // 2, n, j
    cdef double half = 0.5 * dt
    with nogil:
        for n in range(nsteps):
            for j in range(2 * M):
                pv1[j] += half * pa1[j]
                pv2[j] += half * pa2[j]
                pu1[j] += dt * pv1[j]
                pu2[j] += dt * pv2[j]
            _acc(cc, pu1, pu2, m1sq, m2sq, coupling, pa1, pa2, M)
            for j in range(2 * M):
                pv1[j] += half * pa1[j]
                pv2[j] += half * pa2[j]
