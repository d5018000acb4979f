"""Benchmark problems and the problem-definition file format.

Right-hand sides, boundary values and exact solutions are stored as
expression strings, so the same definition evaluates in either precision
mode without loss.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .expr import Expr, compile_expr, parse_rhs, variables
from .greens import DIRICHLET, Robin
from .realgrid import Arith
from .solver import ProblemSpec

_D1 = "(-5 + 2*sqrt(6))"
_S2 = "(3 - 2*sqrt(2))"


@dataclass(frozen=True)
class ExampleDef:
    id: str
    spec: ProblemSpec
    exact: Expr | None = None
    citation: str = ""
    M: object = None
    L: object = None
    description: str = ""

    def exact_function(self, ar: Arith) -> Callable | None:
        return exact_function(self.exact, ar)


def exact_function(e: Expr | None, ar: Arith) -> Callable | None:
    """u(x) from an expression in x, in the scalar mode of ``ar``."""
    if e is None:
        return None
    f = compile_expr(e, ar)
    zero = ar.scalar(0)
    return lambda x: f(x, zero)


def _ex(id, beta, alpha, rhs, exact=None, citation="", M=None, L=None, description="",
        boundary=DIRICHLET, initial_u=None):
    spec = ProblemSpec(Fraction(beta), alpha, rhs, boundary, initial_u)
    return ExampleDef(id, spec, parse_rhs(exact) if exact else None, citation, M, L, description)


def _build():
    import math
    e = math.e
    return (
        _ex("ex1", 1, 0, "exp(u)", exact=f"2*ln(({_D1} + 1)/({_D1}*x^2 + 1))",
            citation="exp source, beta 1", M=4, L=e,
            description="u'' + u'/x = e^u, u(1) = 0"),
        _ex("ex2a", 1, 0, "-0.5*exp(u)", citation="ex2 family, beta 1, mu 0.5", M=4, L=0.5 * e,
            description="u'' + u'/x = -0.5 e^u, u(1) = 0"),
        _ex("ex2b", 1, 0, "-exp(u)", exact=f"2*ln(({_S2} + 1)/({_S2}*x^2 + 1))",
            citation="ex2 family, beta 1, mu 1", M=4, L=e,
            description="u'' + u'/x = -e^u, u(1) = 0"),
        _ex("ex2c", 2, 0, "-0.5*exp(u)", citation="ex2 family, beta 2, mu 0.5",
            description="u'' + 2u'/x = -0.5 e^u, u(1) = 0"),
        _ex("ex2d", 2, 0, "-exp(u)", citation="ex2 family, beta 2, mu 1",
            description="u'' + 2u'/x = -e^u, u(1) = 0"),
        _ex("ex3", 2, "sqrt(3/4)", "-u^5", exact="sqrt(3/(3 + x^2))",
            citation="isothermal sphere", description="isothermal gas sphere, u'' + 2u'/x = -u^5"),
        # f(x, 0) is undefined, so the iteration starts from the boundary value
        _ex("ex4", 3, 1, "1/2 - 1/(8*u^2)", citation="membrane cap", initial_u=1,
            description="shallow membrane cap, u'' + 3u'/x = 1/2 - 1/(8u^2)"),
        _ex("ex5", 2, 1, "1*u/(1 + 0.1*u)", citation="polymer film",
            description="electroactive polymer film, mu = 1, lambda = 0.1"),
        # the boundary value is the exact solution's u(1) = sqrt(2)
        _ex("ex6", "3/2", "sqrt(2)",
            "1/(x^2 + 1)^(3/2) + (3/2)/sqrt(x^2 + 1) - 1 + exp(-sqrt(x^2 + 1))*exp(u)",
            exact="sqrt(x^2 + 1)", citation="rational beta",
            description="(x^(3/2) u')' = x^(3/2) (f(x) + g(x) e^u), solved via y = x^(1/2)"),
        _ex("ex7", 2, 0, "-exp(-u)", citation="Robin, head heat", boundary=Robin(2, 1),
            description="heat in the human head, 2u(1) + u'(1) = 0"),
    )


_REGISTRY: tuple[ExampleDef, ...] | None = None


def registry() -> tuple[ExampleDef, ...]:
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = _build()
    return _REGISTRY


def get_example(id: str) -> ExampleDef:
    for ex in registry():
        if ex.id == id:
            return ex
    known = ", ".join(ex.id for ex in registry())
    raise KeyError(f"unknown example {id!r} (known: {known})")


class ProblemFileError(ValueError):
    pass


def parse_boundary(text: str):
    words = text.split()
    if not words:
        raise ProblemFileError("empty boundary specification")
    kind = words[0].lower()
    if kind == "dirichlet" and len(words) == 1:
        return DIRICHLET
    if kind == "robin" and len(words) == 3:
        try:
            return Robin(Fraction(words[1]), Fraction(words[2]))
        except ValueError as exc:
            raise ProblemFileError(f"bad Robin coefficients: {exc}") from exc
    raise ProblemFileError(f"boundary must be 'dirichlet' or 'robin <mu> <sigma>', got {text!r}")


def parse_problem_file(text: str, name: str = "custom") -> ExampleDef:
    """Read ``key = value`` lines: beta, alpha, rhs, boundary (optional), exact (optional).

    Blank lines and anything after '#' are ignored.
    """
    fields: dict[str, str] = {}
    allowed = {"beta", "alpha", "rhs", "boundary", "exact", "initial"}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ProblemFileError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in allowed:
            raise ProblemFileError(f"line {lineno}: unknown key {key!r}")
        if key in fields:
            raise ProblemFileError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value
    for key in ("beta", "alpha", "rhs"):
        if key not in fields:
            raise ProblemFileError(f"missing required key {key!r}")
    try:
        beta = Fraction(fields["beta"])
    except ValueError as exc:
        raise ProblemFileError(f"beta must be an integer or r/s, got {fields['beta']!r}") from exc
    boundary = parse_boundary(fields.get("boundary", "dirichlet"))
    exact = None
    if "exact" in fields:
        exact = parse_rhs(fields["exact"])
        if "u" in variables(exact):
            raise ProblemFileError("exact solution may only depend on x")
    spec = ProblemSpec(beta, fields["alpha"], fields["rhs"], boundary, fields.get("initial"))
    return ExampleDef(name, spec, exact, citation=name)
