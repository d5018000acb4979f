"""Finite-difference stencils on the uniform grid.

A stencil for the n-th derivative with accuracy order m uses n + m
consecutive nodes, centred on the evaluation index when the grid allows it
and shifted inwards otherwise.  Weights are generated with Fornberg's
recursion in exact rational arithmetic and only rounded when applied, so
both precision modes see correctly rounded coefficients.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .realgrid import Arith, GridFunction


class GridTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class Stencil:
    derivative: int
    accuracy: int
    offsets: tuple[int, ...]
    weights: tuple[Fraction, ...]

    @property
    def width(self) -> int:
        return len(self.offsets)

    def weights_in(self, ar: Arith) -> list:
        return _converted(self.weights, ar.precision)


@functools.lru_cache(maxsize=None)
def _converted(weights, precision):
    ar = precision.arith
    return [ar.scalar(w) for w in weights]


def fornberg_weights(points, order: int, at=0) -> list[list[Fraction]]:
    """Weights c[k][j] of node ``points[j]`` for the k-th derivative at ``at``, k <= order."""
    x = [Fraction(p) for p in points]
    z = Fraction(at)
    npts = len(x)
    c = [[Fraction(0)] * npts for _ in range(order + 1)]
    c[0][0] = Fraction(1)
    c1 = Fraction(1)
    c4 = x[0] - z
    for i in range(1, npts):
        mn = min(i, order)
        c2 = Fraction(1)
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2
            for k in range(mn, 0, -1):
                c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3
            c[0][j] = c4 * c[0][j] / c3
        c1 = c2
    return c


def window_start(width: int, i: int, N: int) -> int:
    """First node of a ``width``-point window around ``i``; ties go left."""
    lo = i - width // 2
    return max(0, min(lo, N - width + 1))


@functools.lru_cache(maxsize=None)
def _stencil(n: int, m: int, offsets: tuple[int, ...]) -> Stencil:
    weights = fornberg_weights(offsets, n)[n]
    return Stencil(n, m, offsets, tuple(weights))


def make_stencil(n: int, m: int, i: int, N: int) -> Stencil:
    """Stencil for the n-th derivative, accuracy order m, evaluated at node i of N intervals."""
    if n < 1 or m < 1:
        raise ValueError("derivative and accuracy orders must be >= 1")
    width = n + m
    if width > N + 1:
        raise GridTooSmall(f"{width}-point stencil does not fit a grid with N={N}")
    if not 0 <= i <= N:
        raise IndexError(f"node index {i} outside 0..{N}")
    lo = window_start(width, i, N)
    return _stencil(n, m, tuple(range(lo - i, lo - i + width)))


def apply(st: Stencil, g: GridFunction, i: int):
    """Approximate the derivative of g at node i."""
    N = g.grid.N
    if i + st.offsets[0] < 0 or i + st.offsets[-1] > N:
        raise IndexError(f"stencil window {st.offsets} does not fit at node {i} of N={N}")
    ar = g.grid.ar
    w = st.weights_in(ar)
    acc = w[0] * g.values[i + st.offsets[0]]
    for wk, o in zip(w[1:], st.offsets[1:]):
        acc = acc + wk * g.values[i + o]
    return acc * ar.scalar(N) ** st.derivative


def apply_all(n: int, m: int, values: np.ndarray, ar: Arith) -> np.ndarray:
    """Derivative estimates at every node.

    ``values`` has the nodes on axis 0 and may carry extra columns (used to
    apply the operator to a whole basis at once).  Rows sharing a window
    shape are handled together.
    """
    N = values.shape[0] - 1
    out = ar.zeros(values.shape)
    scale = ar.scalar(N) ** n
    i = 0
    while i <= N:
        st = make_stencil(n, m, i, N)
        j = i
        while j + 1 <= N and make_stencil(n, m, j + 1, N).offsets == st.offsets:
            j += 1
        w = st.weights_in(ar)
        block = None
        for wk, o in zip(w, st.offsets):
            term = wk * values[i + o: j + 1 + o]
            block = term if block is None else block + term
        out[i: j + 1] = block * scale
        i = j + 1
    return out
