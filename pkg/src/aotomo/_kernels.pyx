# cython: language_level=3
"""Compiled inner loops: tensor-grid bilinear sampling and the fused Neumann update."""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def bilinear_tensor(const double complex[:, ::1] field,
                    const long long[::1] ix0, const double[::1] wx,
                    const long long[::1] iy0, const double[::1] wy,
                    bint periodic):
    cdef Py_ssize_t n0 = field.shape[0], n1 = field.shape[1]
    cdef Py_ssize_t m = ix0.shape[0], p = iy0.shape[0]
    out_arr = np.zeros((m, p), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef Py_ssize_t a, b, i0, i1, j0, j1
    cdef double fx, fy
    cdef double complex v00, v01, v10, v11
    for a in range(m):
        fx = wx[a]
        i0 = ix0[a]
        i1 = i0 + 1
        if periodic:
            i0 = i0 % n0
            if i0 < 0:
                i0 += n0
            i1 = (i0 + 1) % n0
        for b in range(p):
            fy = wy[b]
            j0 = iy0[b]
            j1 = j0 + 1
            if periodic:
                j0 = j0 % n1
                if j0 < 0:
                    j0 += n1
                j1 = (j0 + 1) % n1
            v00 = v01 = v10 = v11 = 0
            if 0 <= i0 < n0:
                if 0 <= j0 < n1:
                    v00 = field[i0, j0]
                if 0 <= j1 < n1:
                    v01 = field[i0, j1]
            if 0 <= i1 < n0:
                if 0 <= j0 < n1:
                    v10 = field[i1, j0]
                if 0 <= j1 < n1:
                    v11 = field[i1, j1]
            out[a, b] = ((1.0 - fx) * ((1.0 - fy) * v00 + fy * v01)
                         + fx * ((1.0 - fy) * v10 + fy * v11))
    return out_arr


def neumann_update(double complex[::1] out, const double complex[::1] base,
                   const double complex[::1] prev, const double complex[::1] s_prev,
                   double c0):
    cdef Py_ssize_t i, size = out.shape[0]
    for i in range(size):
        out[i] = c0 * base[i] + prev[i] - c0 * s_prev[i]
