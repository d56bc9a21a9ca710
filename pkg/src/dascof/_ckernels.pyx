# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lattice kernels: complex LLL and Schnorr-Euchner ball enumeration.

Same contract as ``dascof._pykernels``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, sqrt

cnp.import_array()

ctypedef double complex cplx


cdef inline double _round(double x) nogil:
    return floor(x + 0.5)


cdef inline double _abs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag


def clll_inplace(cplx[:, ::1] B, cplx[:, ::1] R, cplx[:, ::1] U, double delta):
    cdef Py_ssize_t n = B.shape[0], m = B.shape[1]
    cdef Py_ssize_t i, j, c, k = 1
    cdef cplx mu, q, t0, t1, x, y, g00, g01, g10, g11
    cdef double qr, qi, nrm, lhs
    cdef long swaps = 0
    with nogil:
        while k < m:
            j = k - 1
            while j >= 0:
                mu = R[j, k] / R[j, j]
                qr = _round(mu.real)
                qi = _round(mu.imag)
                if qr != 0.0 or qi != 0.0:
                    q = qr + 1j * qi
                    for i in range(j + 1):
                        R[i, k] = R[i, k] - q * R[i, j]
                    for i in range(n):
                        B[i, k] = B[i, k] - q * B[i, j]
                    for i in range(m):
                        U[i, k] = U[i, k] - q * U[i, j]
                j -= 1
            lhs = _abs2(R[k, k]) + _abs2(R[k - 1, k])
            if lhs < delta * _abs2(R[k - 1, k - 1]):
                for i in range(n):
                    t0 = B[i, k - 1]
                    B[i, k - 1] = B[i, k]
                    B[i, k] = t0
                for i in range(m):
                    t0 = U[i, k - 1]
                    U[i, k - 1] = U[i, k]
                    U[i, k] = t0
                    t0 = R[i, k - 1]
                    R[i, k - 1] = R[i, k]
                    R[i, k] = t0
                x = R[k - 1, k - 1]
                y = R[k, k - 1]
                nrm = sqrt(_abs2(x) + _abs2(y))
                g00 = x.conjugate() / nrm
                g01 = y.conjugate() / nrm
                g10 = -y / nrm
                g11 = x / nrm
                for c in range(k - 1, m):
                    t0 = R[k - 1, c]
                    t1 = R[k, c]
                    R[k - 1, c] = g00 * t0 + g01 * t1
                    R[k, c] = g10 * t0 + g11 * t1
                R[k, k - 1] = 0
                swaps += 1
                k = k - 1 if k > 1 else 1
            else:
                k += 1
    return swaps


def enum_ball(double[:, ::1] R, double radius2, long cap):
    cdef Py_ssize_t d = R.shape[0]
    cdef Py_ssize_t i, j
    cdef long[::1] w = np.zeros(d, dtype=np.int_)
    cdef long[::1] dx = np.zeros(d, dtype=np.int_)
    cdef long[::1] ddx = np.zeros(d, dtype=np.int_)
    cdef double[::1] c = np.zeros(d)
    cdef double[::1] diag2 = np.empty(d)
    cdef double[::1] partial = np.zeros(d + 1)
    cdef double diff, dist, s, ci, wi
    cdef long count = 0
    cdef bint nonzero
    cdef list out = []
    for i in range(d):
        diag2[i] = R[i, i] * R[i, i]
    i = d - 1
    dx[i] = 1
    ddx[i] = 1
    while True:
        diff = w[i] - c[i]
        dist = partial[i + 1] + diag2[i] * diff * diff
        if dist <= radius2:
            if i == 0:
                nonzero = False
                for j in range(d):
                    if w[j] != 0:
                        nonzero = True
                        break
                if nonzero:
                    out.append(tuple(w))
                    count += 1
                    if count > cap:
                        return out, True
                w[0] += dx[0]
                ddx[0] = -ddx[0]
                dx[0] = ddx[0] - dx[0]
            else:
                partial[i] = dist
                i -= 1
                s = 0.0
                for j in range(i + 1, d):
                    s += R[i, j] * w[j]
                ci = -s / R[i, i]
                c[i] = ci
                wi = _round(ci)
                w[i] = <long>wi
                if ci < wi:
                    dx[i] = -1
                    ddx[i] = -1
                else:
                    dx[i] = 1
                    ddx[i] = 1
        else:
            i += 1
            if i == d:
                return out, False
            w[i] += dx[i]
            ddx[i] = -ddx[i]
            dx[i] = ddx[i] - dx[i]
