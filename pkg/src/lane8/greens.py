"""Green's kernels of the singular operator and a reference integral solver.

For u'' + (beta/x) u' = phi with u'(0) = 0 the solution is

    u(x) = c + int_0^1 t**beta G0(x, t) phi(t) dt

where c = alpha for u(1) = alpha and c = alpha/mu for the Robin condition
mu u(1) + sigma u'(1) = alpha, whose kernel is G0 shifted by -sigma/mu.

The oracle in this module evaluates that integral with high-order Gauss
quadrature in a private 160-bit context.  It shares no code with the
production quadrature and is used only by tests and diagnostics.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath

from .realgrid import GridFunction, UniformGrid

_OC = mpmath.MPContext()
_OC.prec = 160


@dataclass(frozen=True)
class Dirichlet:
    def __str__(self):
        return "dirichlet"


@dataclass(frozen=True)
class Robin:
    mu: Fraction | float
    sigma: Fraction | float

    def __post_init__(self):
        for name in ("mu", "sigma"):
            v = getattr(self, name)
            if isinstance(v, int):
                object.__setattr__(self, name, Fraction(v))
        if not self.mu > 0:
            raise ValueError(f"Robin coefficient mu must be positive, got {self.mu}")
        if self.sigma < 0:
            raise ValueError(f"Robin coefficient sigma must be non-negative, got {self.sigma}")

    def __str__(self):
        return f"robin {self.mu} {self.sigma}"


DIRICHLET = Dirichlet()


@dataclass(frozen=True)
class Kernel:
    beta: Fraction | float
    boundary: Dirichlet | Robin = DIRICHLET

    def __post_init__(self):
        if self.beta < 1:
            raise ValueError(f"beta must be >= 1, got {self.beta}")

    @property
    def shift(self):
        """Constant added to G0 by the boundary condition (-sigma/mu or 0)."""
        if isinstance(self.boundary, Robin):
            return -self.boundary.sigma / self.boundary.mu
        return 0


def _branch(beta, s):
    """The kernel expression of the larger argument s = max(x, t) (s > 0)."""
    if beta == 1:
        return _OC.ln(s)
    b = _OC.mpf(beta.numerator) / beta.denominator if isinstance(beta, Fraction) else _OC.mpf(beta)
    return (_OC.power(s, 1 - b) - 1) / (1 - b)


def g0(k: Kernel, x, t):
    """G0(x, t) for 0 < x, t <= 1, evaluated at 160 bits."""
    x, t = _OC.mpf(x), _OC.mpf(t)
    if not (0 < x <= 1 and 0 < t <= 1):
        raise ValueError(f"g0 needs x, t in (0, 1], got x={x}, t={t}")
    return _branch(k.beta, max(x, t)) + _oc(k.shift)


def bound_constants(beta) -> tuple[Fraction, Fraction]:
    """(1/(2(beta+1)), 1/(beta+1)): sup-norm bounds of the solution operator and its derivative."""
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    b = Fraction(beta) if not isinstance(beta, float) else Fraction(beta).limit_denominator(10 ** 12)
    return 1 / (2 * (b + 1)), 1 / (b + 1)


def _oc(v):
    if isinstance(v, Fraction):
        return _OC.mpf(v.numerator) / v.denominator
    return _OC.mpf(v)


def _pow(t, beta):
    if isinstance(beta, Fraction) and beta.denominator == 1:
        return t ** int(beta)
    return _OC.power(t, _oc(beta))


_DYADIC_LEVELS = 40


class _Rule:
    """Gauss-Legendre rule on [0, 1]; the graded variant t = s**6 tames log and power terms at 0."""

    def __init__(self, points: int):
        X, W = _OC.gauss_quadrature(points, "legendre")
        self.s = [(x + 1) / 2 for x in X]
        self.w = [w / 2 for w in W]

    def nodes(self, a, b, graded: bool):
        if graded:
            for s, w in zip(self.s, self.w):
                yield a + (b - a) * s ** 6, w * (b - a) * 6 * s ** 5
        else:
            for s, w in zip(self.s, self.w):
                yield a + (b - a) * s, w * (b - a)


def _integral(k: Kernel, x, phi: Callable, breaks, rule: _Rule):
    """int_0^1 t**beta G0(x, t) phi(t) dt, pieces split at ``breaks`` and at x.

    Dyadic points 2^-j above x are added so that no piece away from 0 spans
    more than a factor of two; the log and power terms stay well resolved.
    """
    pts = sorted(set(breaks) | {x} | {_OC.ldexp(1, -j) for j in range(1, _DYADIC_LEVELS) if _OC.ldexp(1, -j) > x})
    total = _OC.zero
    shift = _oc(k.shift)
    for a, b in zip(pts[:-1], pts[1:]):
        if b <= a:
            continue
        for t, w in rule.nodes(a, b, graded=(a == 0)):
            if t == 0:
                continue
            g = _branch(k.beta, max(x, t)) if x > 0 else _branch(k.beta, t)
            total += w * _pow(t, k.beta) * (g + shift) * phi(t)
    return total


def _constant(k: Kernel, alpha):
    a = _oc(alpha)
    if isinstance(k.boundary, Robin):
        return a / _oc(k.boundary.mu)
    return a


def interpolant(phi: GridFunction, points: int = 9) -> Callable:
    """Piecewise Lagrange interpolant of grid values, one polynomial per node interval."""
    nodes = [_oc(v) for v in phi.grid.nodes]
    vals = [_oc(v) for v in phi.values]
    N = len(nodes) - 1
    width = min(points, N + 1)

    def f(t):
        t = _oc(t)
        j = 0
        while j < N - 1 and t > nodes[j + 1]:
            j += 1
        lo = max(0, min(j - (width - 1) // 2, N + 1 - width))
        idx = range(lo, lo + width)
        acc = _OC.zero
        for m in idx:
            num = _OC.one
            for q in idx:
                if q != m:
                    num *= (t - nodes[q]) / (nodes[m] - nodes[q])
            acc += vals[m] * num
        return acc

    return f


def oracle_solve_linear(k: Kernel, phi, alpha, grid: UniformGrid | None = None,
                        points: int = 40) -> GridFunction:
    """Reference values of c + int_0^1 t**beta G0(x_i, t) phi(t) dt at every node.

    ``phi`` is a GridFunction (interpolated locally with degree 8) or a
    callable of one argument.  Each node interval is integrated with a
    ``points``-point Gauss rule; since the kink t = x_i sits on a node,
    every piece is smooth.
    """
    if isinstance(phi, GridFunction):
        grid = phi.grid if grid is None else grid
        fn = interpolant(phi)
    else:
        if grid is None:
            raise ValueError("a grid is needed when phi is a callable")
        fn = lambda t: _oc(phi(t))  # noqa: E731
    nodes = [_oc(v) for v in grid.nodes]
    rule = _Rule(points)
    c = _constant(k, alpha)
    out = [c + _integral(k, x, fn, nodes, rule) for x in nodes]
    ar = grid.ar
    return GridFunction(grid, ar.array([ar.scalar(v) for v in out]))


class ChebyshevProxy:
    """Polynomial interpolant of a function on [0, 1] at Chebyshev points."""

    def __init__(self, fn: Callable, degree: int):
        n = degree + 1
        self.t = [(1 - _OC.cos(_OC.pi * (2 * j + 1) / (2 * n))) / 2 for j in range(n)]
        self.v = [fn(t) for t in self.t]
        # barycentric weights of the first kind
        self.w = [(-1) ** j * _OC.sin(_OC.pi * (2 * j + 1) / (2 * n)) for j in range(n)]

    def __call__(self, x):
        x = _oc(x)
        num = den = _OC.zero
        for t, v, w in zip(self.t, self.v, self.w):
            if x == t:
                return v
            c = w / (x - t)
            num += c * v
            den += c
        return num / den


def oracle_iterates(k: Kernel, f: Callable, alpha, iterations: int, degree: int = 40,
                    points: int = 40, initial: Callable | None = None) -> list[Callable]:
    """Continuous Picard iterates u_0, ..., u_iterations of the integral equation.

    u_j = c + int t**beta G0(x, t) f(t, u_{j-1}(t)) dt with u_{-1} = ``initial``
    (default 0).  Each u_j is stored as a Chebyshev interpolant of ``degree``;
    ``f`` receives 160-bit scalars.
    """
    rule = _Rule(points)
    c = _constant(k, alpha)
    prev = initial if initial is not None else (lambda t: _OC.zero)
    out = []
    for _ in range(iterations + 1):
        src = (lambda p: (lambda t: f(t, p(t))))(prev)
        u = ChebyshevProxy(lambda x, src=src: c + _integral(k, x, src, [_OC.zero, _OC.one], rule), degree)
        out.append(u)
        prev = u
    return out


def kernel_abs_integral(beta, x, points: int = 40):
    """int_0^1 |t**beta G0(x, t)| dt for the Dirichlet kernel."""
    k = Kernel(beta)
    # G0 <= 0 for the Dirichlet kernel, so the absolute value is a sign flip
    return -_integral(k, _oc(x), lambda t: _OC.one, [_OC.zero, _OC.one], _Rule(points))
