"""Command-line interface: ``lane8 {solve,sweep,examples,check}``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import bench
from .expr import ParseError
from .greens import DIRICHLET, Robin
from .problems import ExampleDef, ProblemFileError, get_example, parse_problem_file, registry
from .realgrid import Precision
from .solver import ProblemSpec, SolveConfig, SolveError, Termination, check_wellposedness, solve

EXIT_OK, EXIT_USAGE, EXIT_MAX_ITER, EXIT_DIVERGED, EXIT_NOT_CONTRACTIVE = 0, 1, 2, 3, 4
EXIT_CODES = {Termination.CONVERGED: EXIT_OK, Termination.MAX_ITER: EXIT_MAX_ITER,
              Termination.DIVERGED: EXIT_DIVERGED}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _problem_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("problem (choose one source)")
    g.add_argument("--example", help="registry id, see 'lane8 examples'")
    g.add_argument("--problem-file", help="key = value problem definition")
    g.add_argument("--beta", help="1, an integer n, or r/s")
    g.add_argument("--alpha", help="boundary value (number or constant expression)")
    g.add_argument("--rhs", help="right-hand side f(x, u) as an expression")
    g.add_argument("--robin", nargs=2, metavar=("MU", "SIGMA"), help="use mu u(1) + sigma u'(1) = alpha")


def _solve_args(p: argparse.ArgumentParser, with_n=True):
    if with_n:
        p.add_argument("--n", type=int, default=64, help="number of intervals (default 64)")
    p.add_argument("--tol", type=float, help="stopping tolerance on |Phi_k+1 - Phi_k|")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--precision", choices=["std", "ext"], help="scalar mode (default ext, or $LANE8_PRECISION)")
    p.add_argument("--out", default="-", help="output file, '-' for stdout")
    p.add_argument("--format", choices=["csv", "md", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lane8", description="Eighth-order solvers for singular Lane-Emden problems.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("solve", help="solve one problem")
    _problem_args(p)
    _solve_args(p)
    p = sub.add_parser("sweep", help="convergence table over N = n0 * 2^j")
    _problem_args(p)
    _solve_args(p, with_n=False)
    p.add_argument("--n0", type=int, default=8)
    p.add_argument("--levels", type=int, default=4, help="number of rows (default 4)")
    sub.add_parser("examples", help="list the registry")
    p = sub.add_parser("check", help="contraction precheck q = L / (2 (beta + 1)) < 1")
    _problem_args(p)
    p.add_argument("--bigM", type=float, help="bound M on |f|")
    p.add_argument("--lipschitz", type=float, help="Lipschitz constant L of f in u")
    return ap


def _problem(args) -> ExampleDef:
    custom = any(getattr(args, k) is not None for k in ("beta", "alpha", "rhs", "robin"))
    sources = sum([args.example is not None, args.problem_file is not None, custom])
    if sources != 1:
        raise UsageError("give exactly one of --example, --problem-file or --beta/--alpha/--rhs")
    if args.example is not None:
        try:
            return get_example(args.example)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    if args.problem_file is not None:
        try:
            with open(args.problem_file, encoding="utf-8") as fh:
                return parse_problem_file(fh.read(), name=os.path.basename(args.problem_file))
        except OSError as exc:
            raise UsageError(f"cannot read problem file: {exc}") from None
    if args.beta is None or args.rhs is None:
        raise UsageError("custom problems need --beta and --rhs")
    boundary = DIRICHLET
    if args.robin:
        try:
            boundary = Robin(Fraction(args.robin[0]), Fraction(args.robin[1]))
        except ValueError as exc:
            raise UsageError(f"bad --robin coefficients: {exc}") from None
    try:
        beta = Fraction(args.beta)
    except ValueError:
        raise UsageError(f"--beta must be an integer or r/s, got {args.beta!r}") from None
    spec = ProblemSpec(beta, args.alpha if args.alpha is not None else "0", args.rhs, boundary)
    return ExampleDef("custom", spec)


def _precision(args) -> Precision:
    text = args.precision or os.environ.get("LANE8_PRECISION") or "ext"
    try:
        return Precision.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config(args, N) -> SolveConfig:
    if N < 8:
        raise UsageError(f"N must be ≥ 8 (got {N})")
    try:
        return SolveConfig(N=N, tol=args.tol, max_iter=args.max_iter, precision=_precision(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, out: str):
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {out}", file=sys.stderr)


def format_solution(ex: ExampleDef, cfg: SolveConfig, rep, fmt: str) -> str:
    ar = cfg.precision.arith
    nodes = [ar.to_str(x) for x in rep.U.grid.nodes]
    values = [ar.to_str(v) for v in rep.U.values]
    if fmt == "json":
        doc = {"example": ex.id, "beta": str(ex.spec.beta), "alpha": ar.to_str(ex.spec.alpha_in(ar)),
               "N": cfg.N, "precision": cfg.precision.value, "iterations": rep.iterations,
               "termination": rep.termination.value, "nodes": nodes, "values": values}
        return json.dumps(doc, indent=1) + "\n"
    head = f"{ex.id}: N={cfg.N} k={rep.iterations} termination={rep.termination.value}"
    if fmt == "md":
        lines = [f"**{head}**", "", "| i | x | U |", "|---|---|---|"]
        lines += [f"| {i} | {x} | {v} |" for i, (x, v) in enumerate(zip(nodes, values))]
        return "\n".join(lines) + "\n"
    lines = [f"# {head}", "i,x,U"] + [f"{i},{x},{v}" for i, (x, v) in enumerate(zip(nodes, values))]
    return "\n".join(lines) + "\n"


def cmd_solve(args) -> int:
    ex = _problem(args)
    cfg = _config(args, args.n)
    rep = solve(ex.spec, cfg)
    _emit(format_solution(ex, cfg, rep, args.format), args.out)
    print(f"{ex.id}: {rep.termination.value} after {rep.iterations} iterations", file=sys.stderr)
    return EXIT_CODES[rep.termination]


def cmd_sweep(args) -> int:
    ex = _problem(args)
    if args.levels < 1:
        raise UsageError("--levels must be >= 1")
    cfg = _config(args, args.n0)
    try:
        sw = bench.run_sweep(ex, args.n0, args.levels - 1, cfg)
    except bench.SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    _emit(bench.FORMATTERS[args.format](sw), args.out)
    if sw.all_converged:
        return EXIT_OK
    bad = next(r for r in sw.runs if r.termination is not Termination.CONVERGED)
    print(f"level N={bad.N} ended with {bad.termination.value}", file=sys.stderr)
    return EXIT_CODES[bad.termination]


def cmd_examples(args) -> int:
    for ex in registry():
        exact = "exact" if ex.exact is not None else "no exact"
        print(f"{ex.id:5s} beta={str(ex.spec.beta):4s} {ex.spec.boundary!s:12s} {exact:8s} {ex.description}")
    return EXIT_OK


def cmd_check(args) -> int:
    ex = _problem(args)
    M = args.bigM if args.bigM is not None else ex.M
    L = args.lipschitz if args.lipschitz is not None else ex.L
    if M is None or L is None:
        raise UsageError("check needs --bigM and --lipschitz")
    try:
        w = check_wellposedness(ex.spec, M, L)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"q = {float(w.q):.6g}")
    print(f"|u| <= {float(w.u_bound):.6g}")
    print(f"|u'| <= {float(w.du_bound):.6g}")
    print("contractive" if w.contractive else "not contractive")
    return EXIT_OK if w.contractive else EXIT_NOT_CONTRACTIVE


# values of these flags may start with '-' (e.g. "-exp(u)"), which argparse
# would otherwise read as an option
_EXPRESSION_FLAGS = ("--rhs", "--alpha", "--beta")


def _attach_expressions(argv: list[str]) -> list[str]:
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _EXPRESSION_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "examples": cmd_examples, "check": cmd_check}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_attach_expressions(argv))
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"lane8: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ProblemFileError) as exc:
        print(f"lane8: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolveError, ValueError) as exc:
        print(f"lane8: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
