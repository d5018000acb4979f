"""Error measurement, convergence orders and result tables."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, replace

from .problems import ExampleDef, get_example
from .realgrid import GridFunction, Precision
from .solver import SolveConfig, SolveReport, Termination, solve

FLOOR_FACTOR = 100
COLUMNS = ("example", "N", "k", "E", "order", "flag", "seconds")


class SweepError(RuntimeError):
    def __init__(self, message: str, N: int, report: SolveReport | None = None):
        super().__init__(message)
        self.N = N
        self.report = report


def error_exact(U: GridFunction, exact) -> object:
    """max_i |U(x_i) - u(x_i)|, evaluated on U's own nodes (non-uniform for Method 3)."""
    return max(abs(v - exact(x)) for x, v in zip(U.grid.nodes, U.values))


def error_double_mesh(U_N: GridFunction, U_2N: GridFunction) -> object:
    """max_i |U_N(x_i) - U_2N(x_2i)|."""
    if U_2N.grid.N != 2 * U_N.grid.N or U_2N.grid != U_N.grid.with_intervals(2 * U_N.grid.N):
        raise ValueError(f"grids are not nested: N={U_N.grid.N}, 2N={U_2N.grid.N}")
    return max(abs(a - b) for a, b in zip(U_N.values, U_2N.values[::2]))


def convergence_order(E_coarse, E_fine, floor: float = 0.0):
    """log2(E_coarse / E_fine), or None when either error is at or below ``floor``."""
    if not E_fine > floor or not E_coarse > floor:
        return None
    return math.log2(float(E_coarse) / float(E_fine))


@dataclass
class RunResult:
    example: str
    N: int
    k: int
    E: object
    order: float | None
    seconds: float
    flag: str = ""
    termination: Termination = Termination.CONVERGED
    precision: Precision = Precision.EXTENDED

    def row(self) -> dict:
        ar = self.precision.arith
        return {"example": self.example, "N": self.N, "k": self.k,
                "E": f"{float(self.E):.4e}" if self.E is not None else "",
                "order": "" if self.order is None else f"{self.order:.4f}",
                "flag": self.flag, "seconds": f"{self.seconds:.3f}",
                **({} if self.E is None else {"E_exact": ar.to_str(self.E)})}


@dataclass
class Sweep:
    example: str
    runs: list
    config: SolveConfig

    @property
    def orders(self) -> list:
        return [r.order for r in self.runs[1:]]

    @property
    def all_converged(self) -> bool:
        return all(r.termination is Termination.CONVERGED for r in self.runs)


def _timed_solve(ex: ExampleDef, cfg: SolveConfig):
    t0 = time.perf_counter()
    rep = solve(ex.spec, cfg)
    return rep, time.perf_counter() - t0


def run_sweep(example: str | ExampleDef, N0: int = 8, J: int = 3, cfg: SolveConfig | None = None,
              strict: bool = True) -> Sweep:
    """Solve at N0 * 2^j for j = 0..J and attach errors and orders.

    With an exact solution the error is measured directly; otherwise the
    double-mesh estimate against the next finer solve is used (one extra
    solve at 2 * N0 * 2^J).  Errors below 100 eps are flagged "floor" and get
    no order.  With ``strict`` a diverging solve raises SweepError naming N.
    """
    ex = get_example(example) if isinstance(example, str) else example
    cfg = cfg or SolveConfig()
    ar = cfg.precision.arith
    floor = FLOOR_FACTOR * ar.eps
    exact = ex.exact_function(ar)
    Ns = [N0 * 2 ** j for j in range(J + 1)]
    solves = {}
    for N in Ns + ([] if exact else [2 * Ns[-1]]):
        rep, secs = _timed_solve(ex, replace(cfg, N=N))
        if strict and rep.termination is Termination.DIVERGED:
            raise SweepError(f"{ex.id}: iteration diverged at N={N}", N, rep)
        solves[N] = (rep, secs)
    runs = []
    for j, N in enumerate(Ns):
        rep, secs = solves[N]
        if exact:
            E = error_exact(rep.U, exact)
        else:
            E = error_double_mesh(rep.U, solves[2 * N][0].U)
        flag = "floor" if not E > floor else ""
        if rep.termination is not Termination.CONVERGED:
            flag = rep.termination.value
        order = None
        if j > 0:
            order = convergence_order(runs[-1].E, E, floor)
            if order is None and not flag:
                flag = "unreliable"
        runs.append(RunResult(ex.id, N, rep.iterations, E, order, secs, flag, rep.termination, cfg.precision))
    return Sweep(ex.id, runs, cfg)


def to_csv(sweep: Sweep) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in sweep.runs:
        w.writerow(r.row())
    return buf.getvalue()


def to_markdown(sweep: Sweep) -> str:
    lines = ["| " + " | ".join(COLUMNS) + " |", "|" + "---|" * len(COLUMNS)]
    for r in sweep.runs:
        row = r.row()
        lines.append("| " + " | ".join(str(row[c]) for c in COLUMNS) + " |")
    return "\n".join(lines) + "\n"


def to_jsonl(sweep: Sweep) -> str:
    out = []
    for r in sweep.runs:
        row = r.row()
        rec = {c: row[c] for c in COLUMNS}
        rec["N"], rec["k"] = r.N, r.k
        rec["E"] = row.get("E_exact", "")
        out.append(json.dumps(rec))
    return "\n".join(out) + "\n"


FORMATTERS = {"csv": to_csv, "md": to_markdown, "json": to_jsonl}
