import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lane8 import fdweights
from lane8.greens import Kernel, Robin, oracle_iterates, _OC
from lane8.problems import get_example
from lane8.realgrid import GridFunction, PowerGrid, sample
from lane8.solver import (ProblemSpec, SolveConfig, SolveError, StepOperator, Termination,
                          check_wellposedness, contraction_ratios, method1_step, method2_step, method3_solve,
                          quad_plan, robin_step, solve)

from conftest import EXT, STD, slope

NS = (8, 16, 32, 64)


def _plan(N, beta, precision=EXT):
    return quad_plan(N, beta, precision, 9)


def _const(plan, c):
    return GridFunction(plan.grid, plan.ar.zeros(plan.grid.N + 1) + plan.ar.scalar(c))


# well-posedness ------------------------------------------------------------------
def test_wellposedness_example_one():
    w = check_wellposedness(ProblemSpec(1, 0, "exp(u)"), 4, math.e)
    assert w.q == pytest.approx(math.e / 4)
    assert w.contractive
    assert w.u_bound == pytest.approx(1.0)
    assert w.du_bound == pytest.approx(2.0)


def test_wellposedness_exact_arithmetic():
    w = check_wellposedness(ProblemSpec(2, 0, "x"), Fraction(1), Fraction(6))
    assert w.q == 1 and not w.contractive
    w = check_wellposedness(ProblemSpec(1, 3, "x"), 1, 0)
    assert w.q == 0 and w.contractive and w.u_bound == Fraction(13, 4)


def test_wellposedness_threshold():
    assert not check_wellposedness(ProblemSpec(2, 0, "exp(u)"), 1, 6.1).contractive


@pytest.mark.parametrize("M,L", [(0, 1), (-1, 1), (1, -0.5)])
def test_wellposedness_rejects_bad_constants(M, L):
    with pytest.raises(ValueError):
        check_wellposedness(ProblemSpec(1, 0, "x"), M, L)


# problem and config validation -------------------------------------------------------
@pytest.mark.parametrize("beta", [0, "1/2", -1])
def test_beta_below_one_rejected(beta):
    with pytest.raises(ValueError):
        ProblemSpec(beta, 0, "u")


def test_case_tags():
    assert ProblemSpec(1, 0, "u").case == "one"
    assert ProblemSpec(4, 0, "u").case == "int"
    assert ProblemSpec("6/4", 0, "u").beta == Fraction(3, 2)
    assert ProblemSpec(1.5, 0, "u").case == "rational"


@pytest.mark.parametrize("kw", [dict(N=7), dict(N=8.5), dict(tol=0), dict(tol=-1), dict(max_iter=0),
                                dict(kernel="dense"), dict(tol=1e-31),
                                dict(precision=STD, tol=1e-15)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SolveConfig(**kw)


def test_config_defaults():
    assert SolveConfig().tol == 1e-22
    assert SolveConfig(precision="std").tol == 1e-14


# single steps ------------------------------------------------------------------------
@pytest.mark.parametrize("precision", [STD, EXT])
def test_method1_zero_source(precision):
    p = _plan(16, 1, precision)
    U = method1_step(p, _const(p, 0), 0.5)
    assert all(v == p.ar.scalar(0.5) for v in U.values)


@pytest.mark.parametrize("beta", [1, 2, 3])
def test_constant_source_closed_form(beta):
    p = _plan(16, beta)
    step = method1_step if beta == 1 else method2_step
    U = step(p, _const(p, 1), 0)
    ref = [(x * x - 1) / (2 * (beta + 1)) for x in p.x]
    assert max(abs(a - b) for a, b in zip(U.values, ref)) < 1e-30
    assert abs(U.values[0] + p.ar.scalar(1) / (2 * (beta + 1))) < 1e-30


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=17, max_size=17), st.floats(-3, 3), st.sampled_from([1, 2, 3]))
def test_boundary_value_is_exact(vals, alpha, beta):
    p = _plan(16, beta)
    phi = GridFunction(p.grid, p.ar.array([p.ar.scalar(v) for v in vals]))
    step = method1_step if beta == 1 else method2_step
    assert step(p, phi, alpha).values[-1] == p.ar.scalar(alpha)


def test_step_rejects_wrong_case():
    p = _plan(16, 2)
    with pytest.raises(ValueError):
        method1_step(p, _const(p, 1), 0)
    with pytest.raises(ValueError):
        method2_step(_plan(16, 1), _const(_plan(16, 1), 1), 0)


def test_robin_without_sigma_is_dirichlet():
    p = _plan(16, 2)
    phi = sample(p.grid, p.ar.exp)
    assert robin_step(p, phi, 1, 0, 0.5) == method2_step(p, phi, 0.5)


def test_robin_zero_source():
    p = _plan(16, 1)
    U = robin_step(p, _const(p, 0), 2, 1, 3)
    assert all(v == p.ar.scalar(1.5) for v in U.values)


@pytest.mark.parametrize("mu", [0, -1])
def test_robin_rejects_nonpositive_mu(mu):
    p = _plan(16, 1)
    with pytest.raises(ValueError):
        robin_step(p, _const(p, 1), mu, 1, 0)


def test_robin_manufactured_quadratic():
    # u = 1 + x^2, u'' + (2/x) u' = 6, 2 u(1) + u'(1) = 6
    p = _plan(16, 2)
    U = robin_step(p, _const(p, 6), 2, 1, 6)
    assert max(abs(v - (1 + x * x)) for x, v in zip(p.x, U.values)) < 1e-30


def _robin_gauss(N, beta, mu, sigma):
    # u = exp(x^2), source (2 + 4x^2 + 2 beta) exp(x^2)
    p = _plan(N, beta)
    ar = p.ar
    phi = sample(p.grid, lambda x: (2 + 4 * x * x + 2 * beta) * ar.exp(x * x))
    alpha = (ar.scalar(mu) + 2 * ar.scalar(sigma)) * ar.exp(ar.scalar(1))
    U = robin_step(p, phi, mu, sigma, alpha)
    err = max(abs(v - ar.exp(x * x)) for x, v in zip(p.x, U.values))
    st_ = fdweights.make_stencil(1, 6, N, N)
    bc = ar.scalar(mu) * U.values[-1] + ar.scalar(sigma) * fdweights.apply(st_, U, N) - alpha
    return err, abs(bc)


@pytest.mark.parametrize("beta", [1, 2, 3])
def test_robin_manufactured_gaussian(beta):
    errs, bcs = zip(*(_robin_gauss(N, beta, 2, 1) for N in NS))
    # exp(x^2) has large high derivatives, so the constants are big
    assert slope(NS, errs) > 7.3
    assert float(errs[-1]) < 1e-13
    # the boundary residual is limited by the sixth-order derivative stencil
    assert slope(NS, bcs) > 5
    assert float(bcs[-1]) < 1e-7


# the iteration -----------------------------------------------------------------------
def test_pure_source_converges_in_one_step():
    rep = solve(ProblemSpec(2, 0, "x^2 + 1"), SolveConfig(N=16))
    assert rep.termination is Termination.CONVERGED
    assert rep.iterations == 1 and rep.residual_history == [0]


def test_zero_source_gives_boundary_value():
    rep = solve(ProblemSpec(3, "sqrt(2)", "0"), SolveConfig(N=16))
    assert all(v == EXT.arith.sqrt(EXT.arith.scalar(2)) for v in rep.U.values)


def test_example_one_iterations():
    rep = solve(get_example("ex1").spec, SolveConfig(N=64))
    assert rep.converged
    assert rep.iterations == 27
    assert len(rep.residual_history) == rep.iterations
    assert rep.residual_history[-1] <= 1e-22
    assert rep.U.values[-1] == 0


def test_matrix_and_direct_paths_agree():
    spec = get_example("ex3").spec
    a = solve(spec, SolveConfig(N=16))
    b = solve(spec, SolveConfig(N=16, kernel="direct"))
    assert a.iterations == b.iterations
    assert max(abs(x - y) for x, y in zip(a.U.values, b.U.values)) < 1e-30


def test_robin_paths_agree():
    spec = get_example("ex7").spec
    a = solve(spec, SolveConfig(N=16))
    b = solve(spec, SolveConfig(N=16, kernel="direct"))
    assert max(abs(x - y) for x, y in zip(a.U.values, b.U.values)) < 1e-30


def test_step_operator_standard_mode():
    op = StepOperator(16, 1, STD)
    p = _plan(16, 1, STD)
    phi = sample(p.grid, np.exp)
    assert np.allclose(op.apply(phi.values, 0), method1_step(p, phi, 0).values, rtol=0, atol=1e-14)


def test_determinism():
    spec = get_example("ex2b").spec
    a, b = solve(spec, SolveConfig(N=16)), solve(spec, SolveConfig(N=16))
    assert a.U == b.U and a.residual_history == b.residual_history and a.iterations == b.iterations


def test_max_iter_termination():
    rep = solve(get_example("ex1").spec, SolveConfig(N=16, max_iter=5))
    assert rep.termination is Termination.MAX_ITER
    assert rep.iterations == 5


def test_divergence_detected():
    rep = solve(ProblemSpec(1, 0, "20*u + 1"), SolveConfig(N=16, precision=STD))
    assert rep.termination is Termination.DIVERGED
    assert rep.residual_history[-1] > 1e6 * rep.residual_history[0]


def test_evaluation_failure_names_the_node():
    with pytest.raises(SolveError, match=r"x=0, u=0"):
        solve(ProblemSpec(1, 0, "ln(u)"), SolveConfig(N=16))


def test_initial_guess_override():
    # f(x, 0) is undefined for this right-hand side
    spec = ProblemSpec(3, 1, "1/2 - 1/(8*u^2)")
    with pytest.raises(SolveError):
        solve(spec, SolveConfig(N=16))
    assert solve(spec, SolveConfig(N=16, initial_u=1)).converged


def test_callable_rhs():
    spec = ProblemSpec(1, 0, lambda x, u, ar: ar.exp(u))
    a = solve(spec, SolveConfig(N=16))
    b = solve(get_example("ex1").spec, SolveConfig(N=16))
    assert a.U == b.U


def test_contraction_is_geometric():
    rep = solve(get_example("ex1").spec, SolveConfig(N=32))
    q = math.e / 4
    floor = 100 * EXT.arith.eps
    hist = rep.residual_history
    for k in range(1, len(hist)):
        if hist[k] <= floor:
            break
        assert hist[k] <= hist[k - 1]
        assert hist[k] <= 1.2 * q * hist[k - 1]
    assert all(r <= 1.2 * q for r in contraction_ratios(rep)[:10])


# agreement with the continuous iterates ------------------------------------------------
@pytest.fixture(scope="module")
def continuous_u3():
    return oracle_iterates(Kernel(Fraction(1)), lambda t, u: _OC.exp(u), 0, 3, degree=40)[3]


def _u3_errors(u3, points):
    spec = get_example("ex1").spec
    errs = []
    for N in NS:
        rep = solve(spec, SolveConfig(N=N, max_iter=4, stencil_points=points))
        errs.append(max(abs(_OC.mpf(v) - u3(x)) for x, v in zip(rep.U.grid.nodes, rep.U.values)))
    return errs


@pytest.mark.slow
def test_third_iterate_minimal_width(continuous_u3):
    assert slope(NS, _u3_errors(continuous_u3, None)) == pytest.approx(8, abs=0.7)


@pytest.mark.slow
def test_third_iterate_default_stencils(continuous_u3):
    errs = _u3_errors(continuous_u3, 9)
    assert slope(NS, errs) > 7.3
    assert float(errs[-1]) < 1e-17


# rational beta ------------------------------------------------------------------------
def test_method3_grid_and_zero_source():
    rep = solve(ProblemSpec("3/2", 0, "0"), SolveConfig(N=16))
    assert isinstance(rep.U.grid, PowerGrid)
    assert rep.U.grid == PowerGrid(16, 2, EXT)
    assert all(v == 0 for v in rep.U.values)


def test_method3_needs_rational_beta():
    with pytest.raises(ValueError):
        method3_solve(ProblemSpec(2, 0, "0"), SolveConfig(N=16))


def _sqrt_errors(beta, alpha="sqrt(2)", boundary=None, Ns=NS):
    # u = sqrt(x^2 + 1) gives u'' + (beta/x) u' = (x^2 + 1)^(-3/2) + beta (x^2 + 1)^(-1/2)
    ar = EXT.arith
    rhs = f"1/(x^2 + 1)^(3/2) + ({beta})/sqrt(x^2 + 1)"
    spec = ProblemSpec(Fraction(beta), alpha, rhs, *([boundary] if boundary else []))
    errs = []
    for N in Ns:
        rep = solve(spec, SolveConfig(N=N))
        assert rep.iterations == 1
        errs.append(max(abs(v - ar.sqrt(x * x + 1)) for x, v in zip(rep.U.grid.nodes, rep.U.values)))
    return errs


@pytest.mark.parametrize("beta", ["3/2", "4/3", "5/3"])
def test_method3_manufactured(beta):
    errs = _sqrt_errors(beta)
    orders = [math.log2(float(a) / float(c)) for a, c in zip(errs, errs[1:])]
    assert min(orders) >= 8


def test_large_transformed_exponent_loses_order():
    # beta = 7/2 maps to n = 6; the x^(1-n) factor amplifies the A1 error near 0,
    # so the observed order is about 10 - n
    errs = _sqrt_errors("7/2")
    assert slope(NS[1:], errs[1:]) == pytest.approx(4, abs=0.5)


def test_method3_example_six():
    ex = get_example("ex6")
    ar = EXT.arith
    u = ex.exact_function(ar)
    errs = []
    for N in (8, 16):
        rep = solve(ex.spec, SolveConfig(N=N))
        assert rep.converged
        errs.append(max(abs(v - u(x)) for x, v in zip(rep.U.grid.nodes, rep.U.values)))
    assert 1.66e-10 < errs[1] < 1.66e-8
    assert math.log2(float(errs[0]) / float(errs[1])) >= 8


def test_method3_robin_divides_sigma():
    # 2 u(1) + u'(1) for u = sqrt(x^2 + 1)
    errs = _sqrt_errors("3/2", "2*sqrt(2) + 1/sqrt(2)", Robin(2, 1))
    assert float(errs[-1]) < 1e-13
    assert slope(NS, errs) > 8
