"""Double-double matrix-vector product in numpy.

Mirrors ``_dd.pyx`` operation for operation (Dekker splitting, no fused
multiply-add), so both back ends return bit-identical results.  Rows are
processed together and columns accumulated left to right.
"""
from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd_matvec(ahi: np.ndarray, alo: np.ndarray, xhi: np.ndarray, xlo: np.ndarray):
    """y = A @ x with A and x given as (hi, lo) float64 pairs."""
    ahi = np.ascontiguousarray(ahi, dtype=np.float64)
    alo = np.ascontiguousarray(alo, dtype=np.float64)
    xhi = np.asarray(xhi, dtype=np.float64)
    xlo = np.asarray(xlo, dtype=np.float64)
    rows, cols = ahi.shape
    if alo.shape != ahi.shape or xhi.shape != (cols,) or xlo.shape != (cols,):
        raise ValueError("shape mismatch in dd_matvec")
    shi = np.zeros(rows)
    slo = np.zeros(rows)
    for j in range(cols):
        p, e = _two_prod(ahi[:, j], xhi[j])
        e = e + (ahi[:, j] * xlo[j] + alo[:, j] * xhi[j])
        p, e = _quick_two_sum(p, e)
        s, f = _two_sum(shi, p)
        t, g = _two_sum(slo, e)
        f = f + t
        s, f = _quick_two_sum(s, f)
        f = f + g
        shi, slo = _quick_two_sum(s, f)
    return shi, slo
