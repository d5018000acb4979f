"""Euler-Maclaurin corrected trapezoid rule and the eighth-order operators.

The rule adds the first three Bernoulli corrections to the composite
trapezoid sum::

    T(h) - h^2/12 [g'] + h^4/720 [g'''] - h^6/30240 [g^(5)]

where [.] is the jump between the right and left endpoint.  For the
weighted integrands t^p * phi(t) the endpoint derivatives are expanded with
Leibniz' rule, using exact monomial derivatives and finite differences of
phi.  Everything here is linear in phi; the operators accept either a vector
of node values or a matrix whose columns are several such vectors.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, perm

import numpy as np

from .fdweights import apply_all
from .realgrid import GridFunction, UniformGrid

# Bernoulli coefficients B_2/2!, B_4/4!, B_6/6! (signs folded into the formula)
C2 = Fraction(1, 12)
C4 = Fraction(1, 720)
C6 = Fraction(1, 30240)

# accuracy orders the correction terms need for an O(h^8) total
TERM_ACCURACY = {1: 6, 3: 4, 5: 2}

# every derivative stencil spans nine nodes; with N = 8 that is the whole grid
DEFAULT_STENCIL_POINTS = 9


@dataclass(frozen=True)
class EndpointDerivs:
    d1_a: object
    d3_a: object
    d5_a: object
    d1_b: object
    d3_b: object
    d5_b: object


def em_trapezoid(samples: GridFunction, derivs: EndpointDerivs, start: int = 0, stop: int | None = None):
    """Corrected trapezoid rule over nodes ``start..stop`` of ``samples``."""
    stop = samples.grid.N if stop is None else stop
    if stop - start < 1:
        raise ValueError("need at least two nodes")
    ar = samples.grid.ar
    h = samples.grid.h
    v = samples.values[start: stop + 1]
    half = ar.scalar(Fraction(1, 2))
    interior = sum(v[1:-1], ar.scalar(0))
    t = h * (half * (v[0] + v[-1]) + interior)
    return (t - ar.scalar(C2) * h ** 2 * (derivs.d1_b - derivs.d1_a)
            + ar.scalar(C4) * h ** 4 * (derivs.d3_b - derivs.d3_a)
            - ar.scalar(C6) * h ** 6 * (derivs.d5_b - derivs.d5_a))


def monomial_derivatives(n: int, N: int, max_order: int = 5) -> list[list[Fraction]]:
    """d[p][i] = p-th derivative of t**n at x_i = i/N, exactly."""
    table = []
    for p in range(max_order + 1):
        row = []
        for i in range(N + 1):
            x = Fraction(i, N)
            row.append(Fraction(perm(n, p)) * x ** (n - p) if p <= n else Fraction(0))
        table.append(row)
    return table


def _col(v: np.ndarray, ndim: int) -> np.ndarray:
    """Broadcast a node vector against values with ``ndim`` dimensions."""
    return v if ndim == 1 else v[:, None]


class QuadPlan:
    """Precomputed data for the eighth-order operators on one grid.

    ``beta`` is the integer exponent of the weight t**beta (1 for Method 1,
    n > 1 for Method 2).  ``stencil_points`` fixes the width of every
    derivative stencil; ``None`` uses the minimal width n + m with the
    accuracy orders 6, 4, 2 of the h^2, h^4, h^6 terms.
    """

    def __init__(self, grid: UniformGrid, beta: int, stencil_points: int | None = DEFAULT_STENCIL_POINTS):
        if type(grid) is not UniformGrid:
            raise TypeError("quadrature plans need a uniform grid")
        if int(beta) != beta or beta < 1:
            raise ValueError(f"plan exponent must be a positive integer, got {beta}")
        if stencil_points is not None and not 6 <= stencil_points <= grid.N + 1:
            raise ValueError(f"stencil_points must lie in 6..{grid.N + 1}")
        self.grid = grid
        self.beta = int(beta)
        self.stencil_points = stencil_points
        ar = self.ar = grid.ar
        N = grid.N
        self.x = grid.nodes
        self.h = grid.h
        self._d = {}
        for p in {1, self.beta}:
            self._d[p] = [ar.array(row) for row in monomial_derivatives(p, N)]
        self.xpow = self._d[self.beta][0]
        self.log_x = ar.array([0] + [ar.log(x) for x in self.x[1:]])
        self._c2, self._c4, self._c6 = ar.scalar(C2), ar.scalar(C4), ar.scalar(C6)
        self._half = ar.scalar(Fraction(1, 2))

    @property
    def case(self) -> str:
        return "one" if self.beta == 1 else "int"

    def __repr__(self):
        return f"QuadPlan(N={self.grid.N}, beta={self.beta}, points={self.stencil_points})"

    def monomial_table(self, p: int | None = None) -> list[np.ndarray]:
        return self._d[self.beta if p is None else p]

    def accuracy(self, k: int, term_order: int) -> int:
        """Accuracy order of the k-th derivative stencil used in a correction term."""
        if self.stencil_points is None:
            return TERM_ACCURACY[term_order]
        return self.stencil_points - k

    # building blocks ---------------------------------------------------
    def _derivatives(self, values: np.ndarray, cache: dict, k: int, term_order: int) -> np.ndarray:
        if k == 0:
            return values
        m = self.accuracy(k, term_order)
        key = (k, m)
        if key not in cache:
            cache[key] = apply_all(k, m, values, self.ar)
        return cache[key]

    def endpoint_terms(self, values: np.ndarray, p: int | None):
        """Derivatives 1, 3, 5 of t**p * phi at every node (p=None: of phi itself)."""
        cache: dict = {}
        out = []
        nd = values.ndim
        for order in (1, 3, 5):
            if p is None:
                out.append(self._derivatives(values, cache, order, order))
                continue
            d = self._d[p]
            total = None
            for m in range(order + 1):
                if m > p:
                    break
                coeff = comb(order, m) * _col(d[m], nd)
                term = coeff * self._derivatives(values, cache, order - m, order)
                total = term if total is None else total + term
            out.append(total)
        return out

    def _corrections(self, g1, g3, g5, lo, hi):
        h = self.h
        return (-self._c2 * h ** 2 * (g1[hi] - g1[lo]) + self._c4 * h ** 4 * (g3[hi] - g3[lo])
                - self._c6 * h ** 6 * (g5[hi] - g5[lo]))

    def left_integrals(self, values: np.ndarray, p: int | None = None) -> np.ndarray:
        """L8 approximations of int_0^{x_i} t**p phi dt for every i (0 exactly at i = 0)."""
        p = self.beta if p is None else p
        g = _col(self._d[p][0], values.ndim) * values
        s = np.cumsum(g, axis=0)
        trap = self.h * (s - self._half * (g[0] + g))
        g1, g3, g5 = self.endpoint_terms(values, p)
        h = self.h
        corr = (-self._c2 * h ** 2 * (g1 - g1[0]) + self._c4 * h ** 4 * (g3 - g3[0])
                - self._c6 * h ** 6 * (g5 - g5[0]))
        out = trap + corr
        out[0] = self.ar.zeros(out[0].shape) if out.ndim > 1 else self.ar.scalar(0)
        return out

    def _right(self, g: np.ndarray, values: np.ndarray, p: int | None) -> np.ndarray:
        s = np.cumsum(g[::-1], axis=0)[::-1]
        trap = self.h * (s - self._half * (g + g[-1]))
        g1, g3, g5 = self.endpoint_terms(values, p)
        h = self.h
        corr = (-self._c2 * h ** 2 * (g1[-1] - g1) + self._c4 * h ** 4 * (g3[-1] - g3)
                - self._c6 * h ** 6 * (g5[-1] - g5))
        out = trap + corr
        out[-1] = self.ar.zeros(out[-1].shape) if out.ndim > 1 else self.ar.scalar(0)
        return out

    def right_integrals(self, values: np.ndarray, p: int | None = None) -> np.ndarray:
        """L8 approximations of int_{x_i}^1 t**p phi dt for every i (0 exactly at i = N)."""
        p = self.beta if p is None else p
        g = _col(self._d[p][0], values.ndim) * values
        return self._right(g, values, p)

    # Method 1 (beta = 1) -----------------------------------------------
    def _need(self, case):
        if self.case != case:
            raise ValueError(f"operator needs a beta={'1' if case == 'one' else 'n>1'} plan, got beta={self.beta}")

    def I1(self, values: np.ndarray) -> np.ndarray:
        self._need("one")
        return self.left_integrals(values, 1)

    def F(self, values: np.ndarray) -> np.ndarray:
        """F_i = I1_i / x_i with F_0 = 0."""
        self._need("one")
        i1 = self.I1(values)
        out = self.ar.zeros(values.shape)
        out[1:] = i1[1:] / _col(self.x[1:], values.ndim)
        return out

    def LF(self, values: np.ndarray, F: np.ndarray | None = None) -> np.ndarray:
        """Corrected trapezoid of int_{x_i}^1 F, with stencils applied to F."""
        F = self.F(values) if F is None else F
        return self._right(F, F, None)

    def I2(self, values: np.ndarray) -> np.ndarray:
        self._need("one")
        F = self.F(values)
        lf = self.LF(values, F)
        nd = values.ndim
        out = -_col(self.x * self.log_x, nd) * F - lf
        out[0] = -lf[0]
        out[-1] = self.ar.zeros(out[-1].shape) if nd > 1 else self.ar.scalar(0)
        return out

    # Method 2 (beta = n > 1) -------------------------------------------
    def A1(self, values):
        self._need("int")
        return self.left_integrals(values, self.beta)

    def A2(self, values):
        self._need("int")
        return self.right_integrals(values, self.beta)

    def A3(self, values):
        self._need("int")
        return self.right_integrals(values, 1)

    def full_interval(self, values):
        """int_0^1 t**beta phi dt."""
        return self.left_integrals(values, self.beta)[-1]


def _values(plan: QuadPlan, phi: GridFunction) -> np.ndarray:
    if phi.grid != plan.grid:
        raise ValueError("grid function and plan use different grids")
    return phi.values


def l8_I1(plan: QuadPlan, phi: GridFunction, i: int):
    return plan.I1(_values(plan, phi))[i]


def l8_F_values(plan: QuadPlan, phi: GridFunction) -> GridFunction:
    return GridFunction(plan.grid, plan.F(_values(plan, phi)))


def l8_F(plan: QuadPlan, phi: GridFunction, i: int):
    plan._need("one")
    return plan.LF(_values(plan, phi))[i]


def l8_I2(plan: QuadPlan, phi: GridFunction, i: int):
    return plan.I2(_values(plan, phi))[i]


def l8_A1(plan: QuadPlan, phi: GridFunction, i: int):
    return plan.A1(_values(plan, phi))[i]


def l8_A2(plan: QuadPlan, phi: GridFunction, i: int):
    return plan.A2(_values(plan, phi))[i]


def l8_A3(plan: QuadPlan, phi: GridFunction, i: int):
    return plan.A3(_values(plan, phi))[i]


def l8_full_interval(plan: QuadPlan, phi: GridFunction):
    return plan.full_interval(_values(plan, phi))
