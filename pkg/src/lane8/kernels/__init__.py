"""Hot kernels: compiled when the extension is available, numpy otherwise.

Set ``LANE8_NO_EXT=1`` to force the pure-Python back end.
"""
from __future__ import annotations

import os

import numpy as np

from . import fallback

BACKEND = "python"
dd_matvec = fallback.dd_matvec

if not os.environ.get("LANE8_NO_EXT"):
    try:
        from ._dd import dd_matvec  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        pass


def split_values(values) -> tuple[np.ndarray, np.ndarray]:
    """Split extended values into (hi, lo) float64 arrays of the same shape."""
    values = np.asarray(values, dtype=object)
    hi = np.empty(values.shape)
    lo = np.empty(values.shape)
    for idx, v in np.ndenumerate(values):
        h = float(v)
        hi[idx] = h
        lo[idx] = float(v - h)
    return hi, lo


def join_values(hi: np.ndarray, lo: np.ndarray, ar) -> np.ndarray:
    """Exact sum hi + lo as extended scalars."""
    out = np.empty(hi.shape, dtype=object)
    for idx in np.ndindex(hi.shape):
        out[idx] = ar.scalar(float(hi[idx])) + ar.scalar(float(lo[idx]))
    return out


__all__ = ["BACKEND", "dd_matvec", "split_values", "join_values", "fallback"]
