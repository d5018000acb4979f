"""Arithmetic expressions for user-supplied right-hand sides f(x, u).

Grammar (lowest to highest binding)::

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := '-' unary | '+' unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := number | x | u | pi | e | name '(' args ')' | '(' sum ')'

so ``-e^u`` is ``-(e^u)`` and ``2^-u`` is ``2^(-u)``.  Literals keep their
source text and are converted in the precision mode used for evaluation.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from .realgrid import Arith, Precision


class ParseError(ValueError):
    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class EvalError(ValueError):
    """A domain error during evaluation; names the failing sub-expression."""


@dataclass(frozen=True)
class Num:
    text: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


Expr = Num | Var | Const | Neg | Bin | Call

FUNCTIONS = {"exp": 1, "ln": 1, "log": 1, "sqrt": 1, "sin": 1, "cos": 1, "abs": 1, "pow": 2}
VARIABLES = ("x", "u")
CONSTANTS = ("pi", "e")
_BINARY = {"+": 1, "-": 1, "*": 2, "/": 2}  # all left-associative; '^' is handled in unary()

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_]\w*)
  | (?P<op>\*\*|[-+*/^(),])
""", re.VERBOSE)


def tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind == "op" and m.group() == "**":
            raise ParseError("unknown operator '**' (use '^')", pos, text)
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def take(self):
        tok = self.toks[self.k]
        self.k += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], self.text)

    def expect(self, value):
        tok = self.peek()
        if tok[1] != value or tok[0] == "end":
            self.fail(f"expected {value!r}" + (f", found {tok[1]!r}" if tok[1] else ", found end of input"))
        return self.take()

    def parse(self) -> Expr:
        if self.peek()[0] == "end":
            self.fail("empty expression")
        e = self.expr(1)
        tok = self.peek()
        if tok[0] != "end":
            self.fail("unbalanced ')'" if tok[1] == ")" else f"unexpected {tok[1]!r}")
        return e

    def expr(self, min_prec: int) -> Expr:
        lhs = self.unary()
        while True:
            kind, op, _ = self.peek()
            if kind != "op" or op not in _BINARY:
                return lhs
            prec = _BINARY[op]
            if prec < min_prec:
                return lhs
            self.take()
            lhs = Bin(op, lhs, self.expr(prec + 1))

    def unary(self) -> Expr:
        kind, op, _ = self.peek()
        if kind == "op" and op in "+-":
            self.take()
            operand = self.unary()
            return Neg(operand) if op == "-" else operand
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.take()
        kind, val, pos = tok
        if kind == "num":
            return Num(val)
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                args = [self.expr(1)]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr(1))
                close = self.peek()
                if close[1] != ")":
                    self.fail("unbalanced '('" if close[0] == "end" else f"expected ')', found {close[1]!r}")
                self.take()
                if len(args) != FUNCTIONS[val]:
                    raise ParseError(f"{val} takes {FUNCTIONS[val]} argument(s), got {len(args)}", pos, self.text)
                return Call(val, tuple(args))
            if val in VARIABLES:
                return Var(val)
            if val in CONSTANTS:
                return Const(val)
            raise ParseError(f"unknown identifier {val!r}", pos, self.text)
        if val == "(":
            e = self.expr(1)
            if self.peek()[1] != ")":
                self.fail("unbalanced '('" if self.peek()[0] == "end" else f"expected ')', found {self.peek()[1]!r}")
            self.take()
            return e
        if kind == "end":
            raise ParseError("unexpected end of input", pos, self.text)
        raise ParseError(f"unexpected {val!r}", pos, self.text)


def parse_rhs(text: str) -> Expr:
    """Parse an expression in x and u."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0, text or "")
    return _Parser(text).parse()


def to_text(e: Expr) -> str:
    """Fully parenthesised canonical form; parses back to the same tree."""
    if isinstance(e, Num):
        return e.text
    if isinstance(e, (Var, Const)):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_text(e.operand)})"
    if isinstance(e, Bin):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    return f"{e.name}({', '.join(to_text(a) for a in e.args)})"


def variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return variables(e.operand)
    if isinstance(e, Bin):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Call):
        return set().union(*(variables(a) for a in e.args))
    return set()


def _guard(fn: Callable, e: Expr) -> Callable:
    def run(*vals):
        try:
            return fn(*vals)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            if isinstance(exc, EvalError):
                raise
            shown = ", ".join(str(v) for v in vals)
            raise EvalError(f"cannot evaluate {to_text(e)} with operand(s) {shown}: {exc}") from exc
    return run


def _div(a, b):
    if b == 0:
        raise ZeroDivisionError("division by zero")
    return a / b


def compile_expr(e: Expr, ar: Arith) -> Callable:
    """Turn ``e`` into a function of (x, u) using the scalar mode of ``ar``."""
    if isinstance(e, Num):
        c = ar.from_str(e.text)
        return lambda x, u: c
    if isinstance(e, Var):
        return (lambda x, u: x) if e.name == "x" else (lambda x, u: u)
    if isinstance(e, Const):
        c = ar.pi if e.name == "pi" else ar.e
        return lambda x, u: c
    if isinstance(e, Neg):
        f = compile_expr(e.operand, ar)
        return lambda x, u: -f(x, u)
    if isinstance(e, Bin):
        f, g = compile_expr(e.left, ar), compile_expr(e.right, ar)
        if e.op == "+":
            return lambda x, u: f(x, u) + g(x, u)
        if e.op == "-":
            return lambda x, u: f(x, u) - g(x, u)
        if e.op == "*":
            return lambda x, u: f(x, u) * g(x, u)
        op = _guard(_div if e.op == "/" else ar.power, e)
        return lambda x, u: op(f(x, u), g(x, u))
    args = [compile_expr(a, ar) for a in e.args]
    table = {"exp": ar.exp, "ln": ar.log, "log": ar.log, "sqrt": ar.sqrt, "sin": ar.sin,
             "cos": ar.cos, "abs": ar.fabs, "pow": ar.power}
    fn = _guard(table[e.name], e)
    if len(args) == 1:
        a0 = args[0]
        return lambda x, u: fn(a0(x, u))
    a0, a1 = args
    return lambda x, u: fn(a0(x, u), a1(x, u))


def eval_expr(e: Expr, x, u, precision: Precision = Precision.STANDARD):
    """Evaluate ``e`` at (x, u) in the given precision mode."""
    ar = precision.arith
    return compile_expr(e, ar)(ar.scalar(x), ar.scalar(u))
