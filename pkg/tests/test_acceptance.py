"""Acceptance criteria 1-12.

Each criterion is a function returning ``(passed, detail)``.  Under pytest
every criterion prints one PASS/FAIL line; ``python tests/test_acceptance.py``
prints the same summary without pytest.
"""
import functools
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import EXT, STD, slope  # noqa: E402
from lane8 import fdweights  # noqa: E402
from lane8.bench import convergence_order, error_exact, run_sweep  # noqa: E402
from lane8.emquad import EndpointDerivs, QuadPlan, em_trapezoid  # noqa: E402
from lane8.greens import bound_constants, kernel_abs_integral  # noqa: E402
from lane8.problems import get_example  # noqa: E402
from lane8.realgrid import GridFunction, UniformGrid, sample  # noqa: E402
from lane8.solver import ProblemSpec, SolveConfig, check_wellposedness, method1_step, method2_step, solve  # noqa: E402

NS = (8, 16, 32, 64)
_O = mpmath.MPContext()
_O.prec = 200


def _errors(example, Ns, precision=EXT):
    ex = get_example(example)
    exact = ex.exact_function(precision.arith)
    return [error_exact(solve(ex.spec, SolveConfig(N=N, precision=precision)).U, exact) for N in Ns]


def _within(E, ref, factor=10):
    return ref / factor <= float(E) <= ref * factor


def _fmt(values):
    return ", ".join(f"{float(v):.4e}" for v in values)


def _orders(errs):
    return [convergence_order(a, b) for a, b in zip(errs, errs[1:])]


# 1-6: reference tables ------------------------------------------------------------
def criterion_1():
    t0 = time.perf_counter()
    errs = _errors("ex1", (8, 16, 32))
    secs = time.perf_counter() - t0
    orders = _orders(errs)
    ok = (all(_within(E, ref) for E, ref in zip(errs, (3.8713e-10, 9.1226e-13, 1.4451e-15)))
          and all(7.5 <= o <= 10 for o in orders) and secs < 10)
    return ok, f"E = {_fmt(errs)}; orders {orders[0]:.4f}, {orders[1]:.4f}; {secs:.1f} s"


def criterion_2():
    t0 = time.perf_counter()
    rep = solve(get_example("ex1").spec, SolveConfig(N=64, tol=1e-22))
    secs = time.perf_counter() - t0
    ok = rep.converged and 22 <= rep.iterations <= 32 and secs < 10
    return ok, f"{rep.termination.value}, k = {rep.iterations} (reference 27); {secs:.1f} s"


def criterion_3():
    errs = _errors("ex3", (8, 16))
    order = _orders(errs)[0]
    ok = _within(errs[0], 2.5566e-09) and _within(errs[1], 5.2076e-12) and 7.5 <= order <= 10
    return ok, f"E = {_fmt(errs)}; order {order:.4f}"


def criterion_4():
    sw = run_sweep("ex4", 8, 2)
    ks = [r.k for r in sw.runs]
    orders = sw.orders
    ok = (all(k == 12 for k in ks) and _within(sw.runs[0].E, 1.1595e-13)
          and all(o is not None and 7.5 <= o <= 8.5 for o in orders))
    return ok, (f"k = {ks} (required 12); E(8) = {float(sw.runs[0].E):.4e}; "
                f"orders {', '.join(f'{o:.4f}' for o in orders)}")


def criterion_5():
    sw = run_sweep("ex6", 8, 1)
    ks = [r.k for r in sw.runs]
    order = sw.orders[0]
    ok = all(abs(k - 21) <= 3 for k in ks) and 9 <= order <= 12
    return ok, f"k = {ks} (required 21 +- 3); order 8->16 {order:.4f}"


def criterion_6():
    sw = run_sweep("ex7", 8, 2)
    orders = sw.orders
    ok = sw.all_converged and all(o is not None and 7.5 <= o <= 10 for o in orders)
    return ok, f"E = {_fmt(r.E for r in sw.runs)}; orders {', '.join(f'{o:.4f}' for o in orders)}"


# 7-8: building blocks ---------------------------------------------------------------
def criterion_7():
    t0 = time.perf_counter()
    worst = 0
    for N in (8, 16, 32):
        g = UniformGrid(N, EXT)
        ar = g.ar
        for p in range(8):
            f = sample(g, lambda x: x ** p)
            # odd derivatives of x^p at 0 and 1
            at0 = [ar.scalar(math.factorial(k) if p == k else 0) for k in (1, 3, 5)]
            at1 = [ar.scalar(math.perm(p, k)) for k in (1, 3, 5)]
            exact = ar.scalar(Fraction(1, p + 1))
            err = abs(em_trapezoid(f, EndpointDerivs(*at0, *at1)) - exact) / exact
            worst = max(worst, err / ar.eps)
    secs = time.perf_counter() - t0
    return worst <= 1e3 and secs < 1, f"worst relative error {float(worst):.1f} eps; {secs:.2f} s"


def criterion_8():
    t0 = time.perf_counter()
    N = 16
    h = Fraction(1, N)
    checked, bad = 0, []
    for n, m in ((1, 6), (2, 4), (3, 4), (4, 2), (5, 2)):
        for i in range(N + 1):
            st = fdweights.make_stencil(n, m, i, N)
            for p in range(n + m):
                got = sum(w * ((i + o) * h) ** p for w, o in zip(st.weights, st.offsets)) * N ** n
                want = math.perm(p, n) * (i * h) ** (p - n) if p >= n else 0
                checked += 1
                if got != want:
                    bad.append((n, m, i, p))
    secs = time.perf_counter() - t0
    ok = not bad and secs < 1
    return ok, f"{checked} exact rational checks, {len(bad)} mismatches; {secs:.2f} s"


# 9: operators against a fine-quadrature oracle ------------------------------------
@functools.lru_cache(maxsize=None)
def _oracle(name, beta, N):
    f = _O.exp
    out = []
    for i in range(N + 1):
        x = _O.mpf(i) / N
        if name == "I1":
            v = _O.quad(lambda t: t * f(t), [0, x])
        elif name == "I2":
            v = _O.quad(lambda t: t * _O.log(t) * f(t), [x, 1])
        elif name == "F":
            v = _O.quad(lambda t: ((t - 1) * f(t) + 1) / t, [x, 1])
        elif name == "A1":
            v = _O.quad(lambda t: t ** beta * f(t), [0, x])
        elif name == "A2":
            v = _O.quad(lambda t: t ** beta * f(t), [x, 1])
        else:
            v = _O.quad(lambda t: t * f(t), [x, 1])
        out.append(v)
    return out


OPERATORS = (("I1", 1), ("F", 1), ("I2", 1), ("A1", 2), ("A2", 2), ("A3", 2), ("A1", 3), ("A2", 3), ("A3", 3))


def _operator_slope(name, beta, points):
    errs = []
    for N in NS:
        plan = QuadPlan(UniformGrid(N, EXT), beta, points)
        phi = sample(plan.grid, plan.ar.exp).values
        got = plan.LF(phi) if name == "F" else getattr(plan, name)(phi)
        errs.append(max(abs(_O.mpf(a) - b) for a, b in zip(got, _oracle(name, beta, N))))
    return slope(NS, errs)


def criterion_9():
    t0 = time.perf_counter()
    slopes = {(n, b): _operator_slope(n, b, 9) for n, b in OPERATORS}
    secs = time.perf_counter() - t0
    # the minimal-width stencil policy, reported for comparison only
    minimal = {(n, b): _operator_slope(n, b, None) for n, b in OPERATORS}
    ok = all(abs(s - 8) <= 0.7 for s in slopes.values()) and secs < 30
    show = "; ".join(f"{n}(b={b}) {slopes[n, b]:.2f}/{minimal[n, b]:.2f}" for n, b in OPERATORS)
    return ok, f"slopes default/minimal-width: {show}; {secs:.1f} s"


# 10: structural invariants -----------------------------------------------------------
def _structural():
    failures = []
    rng = np.random.default_rng(7)
    ar = EXT.arith
    for beta in (1, 2, 3):
        plan = QuadPlan(UniformGrid(16, EXT), beta)
        phi = sample(plan.grid, ar.exp)
        v = phi.values
        if beta == 1:
            if plan.I1(v)[0] != 0 or plan.I2(v)[-1] != 0:
                failures.append("I1(0) or I2(1) not zero")
            ops = (plan.I1, plan.I2, plan.F, plan.LF, plan.full_interval)
            step = method1_step
        else:
            if plan.A1(v)[0] != 0 or plan.A2(v)[-1] != 0 or plan.A3(v)[-1] != 0:
                failures.append(f"A-operator zeros, beta={beta}")
            ops = (plan.A1, plan.A2, plan.A3, plan.full_interval)
            step = method2_step
        alpha = ar.from_str("0.7")
        if step(plan, phi, alpha).values[-1] != alpha:
            failures.append(f"U(x_N) != alpha, beta={beta}")
        a, b = ar.scalar(rng.uniform(-2, 2)), ar.scalar(rng.uniform(-2, 2))
        w = ar.array([ar.scalar(t) for t in rng.uniform(-1, 1, 17)])
        for op in ops:
            lhs = np.atleast_1d(op(a * v + b * w))
            rhs = np.atleast_1d(a * op(v) + b * op(w))
            if max(abs(p - q) for p, q in zip(lhs, rhs)) > 1e4 * ar.eps:
                failures.append(f"{op.__name__} not linear, beta={beta}")
    q = check_wellposedness(ProblemSpec(1, 0, "exp(u)"), 4, math.e).q
    if abs(q - math.e / 4) > 1e-15:
        failures.append(f"q = {q}")
    for beta in (1, 2, 3):
        c0, c1 = bound_constants(beta)
        sup0 = max(kernel_abs_integral(Fraction(beta), Fraction(j, 20), points=12) for j in range(21))
        # int_0^1 |t^beta d/dx G0(x, t)| dt = int_0^x (t/x)^beta dt, largest at x = 1
        sup1 = max(_O.quad(lambda t: (t / x) ** beta, [0, x]) for x in (_O.mpf(j) / 20 for j in range(1, 21)))
        if abs(sup0 - c0) > 1e-6 or abs(sup1 - c1) > 1e-6:
            failures.append(f"bound constants, beta={beta}")
    return failures


def criterion_10():
    t0 = time.perf_counter()
    failures = _structural()
    secs = time.perf_counter() - t0
    ok = not failures and secs < 30
    return ok, ("all invariants hold" if not failures else "; ".join(failures)) + f"; {secs:.1f} s"


# 11-12 ---------------------------------------------------------------------------
def criterion_11():
    rep = solve(get_example("ex1").spec, SolveConfig(N=64))
    floor = 100 * EXT.arith.eps
    h = rep.residual_history
    ratios = [float(b / a) for a, b in zip(h, h[1:]) if b > floor]
    ok = rep.converged and all(r <= 0.85 for r in ratios)
    return ok, f"{len(ratios)} pre-floor ratios, largest {max(ratios):.4f}"


def criterion_12():
    e_std = _errors("ex1", (8,), STD)[0]
    e_ext = _errors("ex1", (8,), EXT)[0]
    ok = f"{float(e_std):.1e}" == f"{float(e_ext):.1e}"
    return ok, f"STANDARD {float(e_std):.6e} vs EXTENDED {float(e_ext):.6e}"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 13)}


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, detail = CRITERIA[number]()
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for number, fn in CRITERIA.items():
        ok, detail = fn()
        failed += not ok
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}", flush=True)
    sys.exit(1 if failed else 0)
