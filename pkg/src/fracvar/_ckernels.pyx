# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pair-sum kernels.  Same signatures as _pykernels."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()


def gagliardo_1d(const double[::1] f, const double[::1] P, double p):
    """2 * sum_{i<j} P[j-i] |f_i - f_j|^p."""
    cdef Py_ssize_t N = f.shape[0], i, j
    cdef double acc = 0.0, row, d
    cdef bint unit = p == 1.0
    for i in range(N):
        row = 0.0
        for j in range(i + 1, N):
            d = fabs(f[i] - f[j])
            if d != 0.0:
                row += P[j - i] * (d if unit else pow(d, p))
        acc += row
    return 2.0 * acc


def gagliardo_2d(const double[:, ::1] f, const double[:, ::1] P, double p):
    """sum_{i != j} P[|dx|, |dy|] |f_i - f_j|^p, visiting each unordered pair once."""
    cdef Py_ssize_t Nx = f.shape[0], Ny = f.shape[1]
    cdef Py_ssize_t ix, iy, jx, jy, dx, dy, jy0
    cdef double acc = 0.0, row, d, fi
    cdef bint unit = p == 1.0
    for ix in range(Nx):
        for iy in range(Ny):
            fi = f[ix, iy]
            row = 0.0
            for jx in range(ix, Nx):
                dx = jx - ix
                jy0 = iy + 1 if jx == ix else 0
                for jy in range(jy0, Ny):
                    dy = jy - iy if jy >= iy else iy - jy
                    d = fabs(fi - f[jx, jy])
                    if d != 0.0:
                        row += P[dx, dy] * (d if unit else pow(d, p))
            acc += row
    return 2.0 * acc


def nl_sum_1d(const double[::1] f, const double[::1] g, const double[::1] K):
    """out_i = sum_j K[j-i+N-1] (f_j - f_i)(g_j - g_i)."""
    cdef Py_ssize_t N = f.shape[0], i, j
    out = np.zeros(N)
    cdef double[::1] o = out
    cdef double acc, fi, gi
    for i in range(N):
        acc = 0.0
        fi = f[i]
        gi = g[i]
        for j in range(N):
            acc += K[j - i + N - 1] * (f[j] - fi) * (g[j] - gi)
        o[i] = acc
    return out


def nl_sum_2d(const double[:, ::1] f, const double[:, ::1] g, const double[:, ::1] K):
    cdef Py_ssize_t Nx = f.shape[0], Ny = f.shape[1]
    cdef Py_ssize_t ix, iy, jx, jy
    out = np.zeros((Nx, Ny))
    cdef double[:, ::1] o = out
    cdef double acc, fi, gi
    for ix in range(Nx):
        for iy in range(Ny):
            fi = f[ix, iy]
            gi = g[ix, iy]
            acc = 0.0
            for jx in range(Nx):
                for jy in range(Ny):
                    acc += K[jx - ix + Nx - 1, jy - iy + Ny - 1] * (f[jx, jy] - fi) * (g[jx, jy] - gi)
            o[ix, iy] = acc
    return out


def apply_at_1d(const double[::1] f, const double[::1] W, const Py_ssize_t[::1] idx):
    """sum_m W[m+N-1] f[i+m] at the requested output indices."""
    cdef Py_ssize_t N = f.shape[0], k, i, j
    cdef Py_ssize_t M = idx.shape[0]
    out = np.zeros(M)
    cdef double[::1] o = out
    cdef double acc
    for k in range(M):
        i = idx[k]
        acc = 0.0
        for j in range(N):
            acc += W[j - i + N - 1] * f[j]
        o[k] = acc
    return out


def apply_at_2d(const double[:, ::1] f, const double[:, ::1] W, const Py_ssize_t[:, ::1] idx):
    cdef Py_ssize_t Nx = f.shape[0], Ny = f.shape[1]
    cdef Py_ssize_t M = idx.shape[0], k, ix, iy, jx, jy
    out = np.zeros(M)
    cdef double[::1] o = out
    cdef double acc
    for k in range(M):
        ix = idx[k, 0]
        iy = idx[k, 1]
        acc = 0.0
        for jx in range(Nx):
            for jy in range(Ny):
                acc += W[jx - ix + Nx - 1, jy - iy + Ny - 1] * f[jx, jy]
        o[k] = acc
    return out
