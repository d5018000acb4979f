"""Fixed-point solvers for u'' + (beta/x) u' = f(x, u), u'(0) = 0.

One step maps a source Phi on the grid to U = c + K Phi, the discrete
integral representation of the linear problem; the iteration then sets
Phi <- f(x, U).  K depends only on the grid, beta and the boundary
condition, so it is assembled once (by running the quadrature operators on
the identity) and cached; each step is then a single matrix-vector product.
In EXTENDED mode that product runs in double-double arithmetic.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from . import kernels
from .emquad import DEFAULT_STENCIL_POINTS, QuadPlan
from .expr import Bin, Call, Const, Neg, Num, Var, compile_expr, parse_rhs, variables
from .greens import DIRICHLET, Dirichlet, Robin, bound_constants
from .realgrid import Arith, GridFunction, PowerGrid, Precision, UniformGrid

DIVERGENCE_FACTOR = 1e6
_EXPR_NODES = (Num, Var, Const, Neg, Bin, Call)
DEFAULT_TOL = {Precision.EXTENDED: 1e-22, Precision.STANDARD: 1e-14}


class SolveError(RuntimeError):
    """The right-hand side could not be evaluated during an iteration."""


class Termination(enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    DIVERGED = "diverged"


def _as_fraction(beta) -> Fraction:
    if isinstance(beta, str):
        return Fraction(beta.strip())
    if isinstance(beta, float):
        f = Fraction(beta).limit_denominator(1000)
        if float(f) != beta:
            raise ValueError(f"beta must be rational, got {beta}")
        return f
    return Fraction(beta)


def _constant(value, ar: Arith):
    """Convert a number, Fraction, decimal or expression string (no x, u) to the mode."""
    if isinstance(value, str):
        value = parse_rhs(value)
    if isinstance(value, _EXPR_NODES):
        if variables(value):
            raise ValueError("constant expression may not use x or u")
        return compile_expr(value, ar)(ar.scalar(0), ar.scalar(0))
    return ar.scalar(value)


@dataclass(frozen=True)
class ProblemSpec:
    """A Lane-Emden problem.

    ``rhs`` is an expression (string or parsed tree) in x and u, or a
    callable ``rhs(x, u, ar)`` receiving scalars of the active mode.
    ``alpha`` and ``initial_u`` may be numbers or constant expressions such
    as ``"sqrt(2)"``; ``initial_u`` (default 0) is the guess that seeds
    Phi_0 = f(x, initial_u).
    """

    beta: Fraction
    alpha: object
    rhs: object
    boundary: Dirichlet | Robin = DIRICHLET
    initial_u: object = None

    def __post_init__(self):
        b = _as_fraction(self.beta)
        if b < 1:
            raise ValueError(f"beta must be >= 1, got {b}")
        object.__setattr__(self, "beta", b)
        if isinstance(self.rhs, str):
            object.__setattr__(self, "rhs", parse_rhs(self.rhs))

    @property
    def case(self) -> str:
        if self.beta == 1:
            return "one"
        return "int" if self.beta.denominator == 1 else "rational"

    def rhs_function(self, ar: Arith) -> Callable:
        if callable(self.rhs):
            f = self.rhs
            return lambda x, u: f(x, u, ar)
        return compile_expr(self.rhs, ar)

    def alpha_in(self, ar: Arith):
        return _constant(self.alpha, ar)


@dataclass(frozen=True)
class WellPosedness:
    M: object
    L: object
    q: object
    u_bound: object
    du_bound: object
    contractive: bool


def check_wellposedness(p: ProblemSpec, M, L) -> WellPosedness:
    """Contraction coefficient and solution bounds from the caller's M and L."""
    if not M > 0:
        raise ValueError("M must be positive")
    if L < 0:
        raise ValueError("L must be non-negative")
    c0, c1 = bound_constants(p.beta)
    exact = not isinstance(M, float) and not isinstance(L, float)
    if not exact:
        c0, c1 = float(c0), float(c1)
    q = L * c0
    alpha = p.alpha if isinstance(p.alpha, (int, Fraction)) else p.alpha_in(Precision.STANDARD.arith)
    u_bound = abs(alpha) + M * c0
    return WellPosedness(M, L, q, u_bound, M * c1, bool(q < 1))


@dataclass(frozen=True)
class SolveConfig:
    N: int = 64
    tol: float | None = None
    max_iter: int = 100
    precision: Precision = Precision.EXTENDED
    stencil_points: int | None = DEFAULT_STENCIL_POINTS
    # "matrix": cached step matrix (default); "direct": quadrature operators every step
    kernel: str = "matrix"
    initial_u: object = None

    def __post_init__(self):
        if isinstance(self.precision, str):
            object.__setattr__(self, "precision", Precision.parse(self.precision))
        if int(self.N) != self.N or self.N < 8:
            raise ValueError(f"N must be >= 8 (got {self.N})")
        tol = DEFAULT_TOL[self.precision] if self.tol is None else self.tol
        eps = self.precision.arith.eps
        if not tol > 0:
            raise ValueError("tol must be positive")
        if tol < 50 * eps:
            raise ValueError(f"tol={tol:g} is below 50 eps = {50 * eps:.3g} for {self.precision.name}")
        object.__setattr__(self, "tol", float(tol))
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.kernel not in ("matrix", "direct"):
            raise ValueError("kernel must be 'matrix' or 'direct'")


@dataclass
class SolveReport:
    U: GridFunction
    iterations: int
    residual_history: list = field(default_factory=list)
    termination: Termination = Termination.CONVERGED
    phi: GridFunction | None = None

    @property
    def converged(self) -> bool:
        return self.termination is Termination.CONVERGED


# one step, operator form ------------------------------------------------
def _linear_part(plan: QuadPlan, values: np.ndarray) -> np.ndarray:
    """int_0^1 t^beta G0(x_i, t) phi dt at every node for the Dirichlet kernel."""
    ar = plan.ar
    nd = values.ndim
    col = (lambda v: v) if nd == 1 else (lambda v: v[:, None])
    if plan.beta == 1:
        out = plan.I2(values) + col(plan.log_x) * plan.I1(values)
        return out
    n = plan.beta
    one_minus_n = ar.scalar(1 - n)
    a1, a2, a3 = plan.A1(values), plan.A2(values), plan.A3(values)
    factor = ar.zeros(plan.grid.N + 1)
    # x_i^(1-n) - 1, with the i = 0 entry unused (A1 vanishes there)
    factor[1:] = np.array([ar.power(x, 1 - n) - 1 for x in plan.x[1:]], dtype=ar.dtype)
    return (col(factor) * a1 - a2 + a3) / one_minus_n


def _check_plan(plan: QuadPlan, phi: GridFunction):
    if phi.grid != plan.grid:
        raise ValueError("source and plan live on different grids")


def method1_step(plan: QuadPlan, phi: GridFunction, alpha) -> GridFunction:
    """U_i = alpha + L8(I2, x_i) phi + ln(x_i) L8(I1, x_i) phi (beta = 1)."""
    plan._need("one")
    _check_plan(plan, phi)
    return GridFunction(plan.grid, plan.ar.scalar(alpha) + _linear_part(plan, phi.values))


def method2_step(plan: QuadPlan, phi: GridFunction, alpha) -> GridFunction:
    """Integer beta = n > 1 step built from the A1, A2, A3 operators."""
    plan._need("int")
    _check_plan(plan, phi)
    return GridFunction(plan.grid, plan.ar.scalar(alpha) + _linear_part(plan, phi.values))


def robin_step(plan: QuadPlan, phi: GridFunction, mu, sigma, alpha) -> GridFunction:
    """Step for mu u(1) + sigma u'(1) = alpha: the kernel gains the constant -sigma/mu."""
    Robin(mu, sigma)  # validates
    _check_plan(plan, phi)
    ar = plan.ar
    mu_, sigma_ = ar.scalar(mu), ar.scalar(sigma)
    base = ar.scalar(alpha) / mu_ + _linear_part(plan, phi.values)
    return GridFunction(plan.grid, base - (sigma_ / mu_) * plan.full_interval(phi.values))


# cached step matrices ----------------------------------------------------
@functools.lru_cache(maxsize=64)
def quad_plan(N: int, beta: int, precision: Precision, stencil_points) -> QuadPlan:
    return QuadPlan(UniformGrid(N, precision), beta, stencil_points)


@functools.lru_cache(maxsize=32)
def _dirichlet_matrix(N: int, beta: int, precision: Precision, stencil_points):
    plan = quad_plan(N, beta, precision, stencil_points)
    eye = plan.ar.zeros((N + 1, N + 1))
    one = plan.ar.scalar(1)
    for j in range(N + 1):
        eye[j, j] = one
    K = _linear_part(plan, eye)
    w = plan.left_integrals(eye, beta)[-1]
    K.flags.writeable = False
    w.flags.writeable = False
    return K, w


class StepOperator:
    """U = c + K Phi for one grid, beta and boundary condition."""

    def __init__(self, N: int, beta: int, precision: Precision, boundary=DIRICHLET,
                 stencil_points=DEFAULT_STENCIL_POINTS):
        self.plan = quad_plan(N, beta, precision, stencil_points)
        ar = self.ar = self.plan.ar
        K, w = _dirichlet_matrix(N, beta, precision, stencil_points)
        if isinstance(boundary, Robin):
            shift = ar.scalar(boundary.sigma) / ar.scalar(boundary.mu)
            K = K - shift * np.broadcast_to(w, K.shape)
        self.K = K
        self.boundary = boundary
        if ar.extended:
            self._hi, self._lo = kernels.split_values(K)

    @property
    def grid(self) -> UniformGrid:
        return self.plan.grid

    def constant(self, alpha):
        if isinstance(self.boundary, Robin):
            return alpha / self.ar.scalar(self.boundary.mu)
        return alpha

    def apply(self, phi: np.ndarray, alpha) -> np.ndarray:
        c = self.constant(alpha)
        if self.ar.extended:
            xh, xl = kernels.split_values(phi)
            yh, yl = kernels.dd_matvec(self._hi, self._lo, xh, xl)
            return c + kernels.join_values(yh, yl, self.ar)
        return c + self.K @ phi


# the iteration -------------------------------------------------------------
def _evaluate(f: Callable, x: np.ndarray, u: np.ndarray, ar: Arith) -> np.ndarray:
    out = ar.zeros(len(x))
    for i, (xi, ui) in enumerate(zip(x, u)):
        try:
            v = f(xi, ui)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise SolveError(f"f(x, u) failed at x={ar.to_float(xi):.17g}, u={ar.to_float(ui):.17g}: {exc}") from exc
        v = ar.scalar(v)
        if not ar.isfinite(v):
            raise SolveError(f"f(x, u) is not finite at x={ar.to_float(xi):.17g}, u={ar.to_float(ui):.17g}")
        out[i] = v
    return out


def _iterate(grid: UniformGrid, step: Callable, f: Callable, u_init, cfg: SolveConfig, ar: Arith) -> SolveReport:
    x = grid.nodes
    u0 = ar.zeros(len(x)) + u_init
    phi = _evaluate(f, x, u0, ar)
    history = []
    termination = Termination.MAX_ITER
    U = u0
    for _ in range(cfg.max_iter):
        U = step(phi)
        nxt = _evaluate(f, x, U, ar)
        r = max(abs(a - b) for a, b in zip(nxt, phi))
        history.append(r)
        phi = nxt
        if r <= cfg.tol:
            termination = Termination.CONVERGED
            break
        if r > DIVERGENCE_FACTOR * history[0] and history[0] > 0:
            termination = Termination.DIVERGED
            break
    return SolveReport(GridFunction(grid, U), len(history), history, termination, GridFunction(grid, phi))


def _initial(p: ProblemSpec, cfg: SolveConfig, ar: Arith):
    guess = cfg.initial_u if cfg.initial_u is not None else p.initial_u
    return ar.scalar(0) if guess is None else _constant(guess, ar)


def _integer_solve(p: ProblemSpec, cfg: SolveConfig, f: Callable, beta: int, boundary) -> SolveReport:
    ar = cfg.precision.arith
    alpha = p.alpha_in(ar)
    if cfg.kernel == "matrix":
        op = StepOperator(cfg.N, beta, cfg.precision, boundary, cfg.stencil_points)
        grid = op.grid

        def step(phi):
            return op.apply(phi, alpha)
    else:
        plan = quad_plan(cfg.N, beta, cfg.precision, cfg.stencil_points)
        grid = plan.grid

        def step(phi):
            g = GridFunction(grid, phi)
            if isinstance(boundary, Robin):
                return robin_step(plan, g, boundary.mu, boundary.sigma, alpha).values
            if beta == 1:
                return method1_step(plan, g, alpha).values
            return method2_step(plan, g, alpha).values
    return _iterate(grid, step, f, _initial(p, cfg, ar), cfg, ar)


def method3_solve(p: ProblemSpec, cfg: SolveConfig) -> SolveReport:
    """beta = r/s: solve in y = x^(1/s), where the exponent becomes n = r - s + 1.

    The transformed equation is v'' + (n/y) v' = s^2 y^(2s-2) f(y^s, v).  A
    Robin condition keeps mu and divides sigma by s, since u'(1) = v'(1)/s.
    The result lives on the nodes x_i = (i/N)^s.
    """
    if p.case != "rational":
        raise ValueError("method3_solve needs a non-integer rational beta")
    r, s = p.beta.numerator, p.beta.denominator
    n = r - s + 1
    if n < 2:
        raise ValueError(f"transformed exponent r - s + 1 = {n} < 2")
    ar = cfg.precision.arith
    f = p.rhs_function(ar)
    s2 = ar.scalar(s * s)

    def g(y, v):
        return s2 * y ** (2 * s - 2) * f(y ** s, v)

    boundary = p.boundary
    if isinstance(boundary, Robin):
        boundary = Robin(boundary.mu, Fraction(boundary.sigma) / s
                         if not isinstance(boundary.sigma, float) else boundary.sigma / s)
    rep = _integer_solve(p, cfg, g, n, boundary)
    xgrid = PowerGrid(cfg.N, s, cfg.precision)
    return replace(rep, U=GridFunction(xgrid, rep.U.values), phi=None)


def solve(p: ProblemSpec, cfg: SolveConfig | None = None) -> SolveReport:
    """Run the fixed-point iteration to tolerance, max_iter or divergence."""
    cfg = cfg or SolveConfig()
    if p.case == "rational":
        return method3_solve(p, cfg)
    ar = cfg.precision.arith
    return _integer_solve(p, cfg, p.rhs_function(ar), int(p.beta), p.boundary)


def contraction_ratios(report: SolveReport) -> list[float]:
    h = report.residual_history
    return [float(b) / float(a) if a else math.inf for a, b in zip(h[:-1], h[1:])]
