"""Eighth-order iterative solvers for singular Lane-Emden boundary value problems.

    >>> from lane8 import get_example, solve, SolveConfig
    >>> report = solve(get_example("ex1").spec, SolveConfig(N=16))
"""
from .greens import DIRICHLET, Kernel, Robin
from .problems import ExampleDef, get_example, parse_problem_file, registry
from .realgrid import GridFunction, PowerGrid, Precision, UniformGrid
from .solver import (ProblemSpec, SolveConfig, SolveReport, Termination, check_wellposedness,
                     method3_solve, solve)

__version__ = "0.1.0"

__all__ = [
    "DIRICHLET", "ExampleDef", "GridFunction", "Kernel", "PowerGrid", "Precision", "ProblemSpec",
    "Robin", "SolveConfig", "SolveReport", "Termination", "UniformGrid", "check_wellposedness",
    "get_example", "method3_solve", "parse_problem_file", "registry", "solve",
]
