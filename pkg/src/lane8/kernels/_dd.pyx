# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled double-double matrix-vector product (see fallback.py)."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef double SPLITTER = 134217729.0


cdef inline void two_sum(double a, double b, double* s, double* e) noexcept nogil:
    cdef double ss = a + b
    cdef double bb = ss - a
    s[0] = ss
    e[0] = (a - (ss - bb)) + (b - bb)


cdef inline void quick_two_sum(double a, double b, double* s, double* e) noexcept nogil:
    cdef double ss = a + b
    s[0] = ss
    e[0] = b - (ss - a)


cdef inline void split(double a, double* hi, double* lo) noexcept nogil:
    cdef double t = SPLITTER * a
    cdef double h = t - (t - a)
    hi[0] = h
    lo[0] = a - h


cdef inline void two_prod(double a, double b, double* p, double* e) noexcept nogil:
    cdef double ah, al, bh, bl
    cdef double pp = a * b
    split(a, &ah, &al)
    split(b, &bh, &bl)
    p[0] = pp
    e[0] = ((ah * bh - pp) + ah * bl + al * bh) + al * bl


def dd_matvec(ahi, alo, xhi, xlo):
    cdef double[:, ::1] Ah = np.ascontiguousarray(ahi, dtype=np.float64)
    cdef double[:, ::1] Al = np.ascontiguousarray(alo, dtype=np.float64)
    cdef double[::1] Xh = np.ascontiguousarray(xhi, dtype=np.float64)
    cdef double[::1] Xl = np.ascontiguousarray(xlo, dtype=np.float64)
    cdef Py_ssize_t rows = Ah.shape[0], cols = Ah.shape[1]
    if Al.shape[0] != rows or Al.shape[1] != cols or Xh.shape[0] != cols or Xl.shape[0] != cols:
        raise ValueError("shape mismatch in dd_matvec")
    yhi = np.zeros(rows)
    ylo = np.zeros(rows)
    cdef double[::1] Yh = yhi
    cdef double[::1] Yl = ylo
    cdef Py_ssize_t i, j
    cdef double p, e, s, f, t, g, shi, slo
    with nogil:
        for i in range(rows):
            shi = 0.0
            slo = 0.0
            for j in range(cols):
                two_prod(Ah[i, j], Xh[j], &p, &e)
                e = e + (Ah[i, j] * Xl[j] + Al[i, j] * Xh[j])
                quick_two_sum(p, e, &p, &e)
                two_sum(shi, p, &s, &f)
                two_sum(slo, e, &t, &g)
                f = f + t
                quick_two_sum(s, f, &s, &f)
                f = f + g
                quick_two_sum(s, f, &shi, &slo)
            Yh[i] = shi
            Yl[i] = slo
    return yhi, ylo
