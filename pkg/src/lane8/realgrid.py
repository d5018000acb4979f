"""Precision modes, grids on [0, 1] and grid functions.

Two scalar modes are supported.  STANDARD is plain binary64 (Python
floats, numpy float64 arrays).  EXTENDED uses a private mpmath context at
113 bits for scalar work and object arrays of its ``mpf`` values for grid
data; the linear solve kernels run in double-double (~106 bits), which
is what the mode's unit roundoff reports.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np

_EXT_BITS = 113
_CTX = mpmath.MPContext()
_CTX.prec = _EXT_BITS


class PrecisionMismatch(ValueError):
    """Raised when data from two precision modes meet in one computation."""


class SampleError(ValueError):
    """A function could not be sampled at a grid node."""


class Precision(enum.Enum):
    STANDARD = "std"
    EXTENDED = "ext"

    @classmethod
    def parse(cls, text: str) -> "Precision":
        key = text.strip().lower()
        aliases = {"std": cls.STANDARD, "standard": cls.STANDARD, "double": cls.STANDARD,
                   "ext": cls.EXTENDED, "extended": cls.EXTENDED}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown precision mode {text!r} (use 'std' or 'ext')") from None

    @property
    def arith(self) -> "Arith":
        return _STANDARD if self is Precision.STANDARD else _EXTENDED


class Arith:
    """Scalar operations for one precision mode.

    Every numerical routine in the package receives an ``Arith`` (usually via
    a grid) and uses it for constants, elementary functions and array
    construction, so that the same code runs in both modes.
    """

    def __init__(self, precision: Precision):
        self.precision = precision
        ext = precision is Precision.EXTENDED
        self.extended = ext
        if ext:
            self.ctx = _CTX
            self.dtype = object
            self.eps = 2.0 ** -106
            self.digits = 36  # decimal digits that round-trip 113 bits
            self.pi = _CTX.pi
            self.e = _CTX.e
            self._exp, self._log, self._sqrt = _CTX.exp, _CTX.ln, _CTX.sqrt
            self._sin, self._cos = _CTX.sin, _CTX.cos
        else:
            self.ctx = None
            self.dtype = np.float64
            self.eps = 2.0 ** -53
            self.digits = 17
            self.pi = math.pi
            self.e = math.e
            self._exp, self._log, self._sqrt = math.exp, math.log, math.sqrt
            self._sin, self._cos = math.sin, math.cos

    def __repr__(self):
        return f"Arith({self.precision.name})"

    # conversions
    def scalar(self, value):
        """Convert an int, float, Fraction, decimal string or mpf to this mode."""
        if self.extended:
            if isinstance(value, Fraction):
                return _CTX.mpf(value.numerator) / value.denominator
            if isinstance(value, mpmath.mpf) or hasattr(value, "_mpf_"):
                return _CTX.mpf(value)
            if isinstance(value, np.floating):
                value = float(value)
            return _CTX.mpf(value)
        if isinstance(value, Fraction):
            return value.numerator / value.denominator
        return float(value)

    def array(self, values) -> np.ndarray:
        if self.extended:
            out = np.empty(len(values), dtype=object)
            for k, v in enumerate(values):
                out[k] = self.scalar(v)
            return out
        return np.array([self.scalar(v) for v in values], dtype=np.float64)

    def zeros(self, shape) -> np.ndarray:
        if self.extended:
            out = np.empty(shape, dtype=object)
            out.fill(_CTX.zero)
            return out
        return np.zeros(shape)

    def to_str(self, value) -> str:
        """Decimal string that converts back to the identical value."""
        if self.extended:
            return mpmath.libmp.to_str(_CTX.mpf(value)._mpf_, self.digits)
        return repr(float(value))

    def from_str(self, text: str):
        return self.scalar(text.strip())

    def to_float(self, value) -> float:
        return float(value)

    # elementary functions; domain problems raise ValueError
    def exp(self, v):
        return self._exp(v)

    def log(self, v):
        if not v > 0:
            raise ValueError(f"log of non-positive value {v}")
        return self._log(v)

    def sqrt(self, v):
        if v < 0:
            raise ValueError(f"sqrt of negative value {v}")
        return self._sqrt(v)

    def sin(self, v):
        return self._sin(v)

    def cos(self, v):
        return self._cos(v)

    def fabs(self, v):
        return abs(v)

    def power(self, base, expo):
        if base < 0 and expo != int(expo):
            raise ValueError(f"non-integer power {expo} of negative base {base}")
        if base == 0 and expo < 0:
            raise ZeroDivisionError("zero raised to a negative power")
        if self.extended:
            if expo == int(expo) and abs(expo) < 2 ** 31:
                return _CTX.mpf(base) ** int(expo)
            return _CTX.power(base, expo)
        return math.pow(base, expo)

    def isfinite(self, v) -> bool:
        if self.extended:
            return bool(_CTX.isfinite(v))
        return math.isfinite(v)


_STANDARD = Arith(Precision.STANDARD)
_EXTENDED = Arith(Precision.EXTENDED)


def arith_for(precision: Precision | str) -> Arith:
    if isinstance(precision, str):
        precision = Precision.parse(precision)
    return precision.arith


MIN_INTERVALS = 8


class UniformGrid:
    """Equispaced nodes x_i = i/N, i = 0..N, on [0, 1]."""

    power = 1

    def __init__(self, N: int, precision: Precision = Precision.STANDARD):
        if int(N) != N or N < MIN_INTERVALS:
            raise ValueError(f"N must be >= {MIN_INTERVALS} (got {N})")
        self.N = int(N)
        self.precision = precision
        self.ar = precision.arith
        ar = self.ar
        # i/N is correctly rounded and gives x_0 = 0, x_N = 1 exactly
        self.h = ar.scalar(Fraction(1, self.N))
        self.nodes = self._make_nodes()
        self.nodes.flags.writeable = False

    def _make_nodes(self) -> np.ndarray:
        return self.ar.array([Fraction(i, self.N) for i in range(self.N + 1)])

    def __len__(self):
        return self.N + 1

    def __eq__(self, other):
        return (type(self) is type(other) and self.N == other.N
                and self.precision is other.precision and self.power == other.power)

    def __hash__(self):
        return hash((type(self).__name__, self.N, self.precision, self.power))

    def __repr__(self):
        return f"{type(self).__name__}(N={self.N}, {self.precision.name})"

    def with_intervals(self, N: int) -> "UniformGrid":
        return UniformGrid(N, self.precision)

    def coarsen(self) -> "UniformGrid":
        if self.N % 2:
            raise ValueError(f"cannot coarsen a grid with odd interval count {self.N}")
        return self.with_intervals(self.N // 2)


class PowerGrid(UniformGrid):
    """Nodes x_i = (i/N)**s: the image of a uniform grid under y -> y**s."""

    def __init__(self, N: int, power: int, precision: Precision = Precision.STANDARD):
        if power < 1:
            raise ValueError("power must be a positive integer")
        self.power = int(power)
        super().__init__(N, precision)

    def _make_nodes(self):
        return self.ar.array([Fraction(i, self.N) ** self.power for i in range(self.N + 1)])

    def __repr__(self):
        return f"PowerGrid(N={self.N}, s={self.power}, {self.precision.name})"

    def with_intervals(self, N: int) -> "PowerGrid":
        return PowerGrid(N, self.power, self.precision)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: UniformGrid
    values: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.values)
        if not self.grid.ar.extended and raw.dtype == object and any(hasattr(v, "_mpf_") for v in raw.flat):
            raise PrecisionMismatch("EXTENDED values given to a STANDARD grid")
        vals = np.asarray(raw, dtype=self.grid.ar.dtype)
        if vals.shape != (self.grid.N + 1,):
            raise ValueError(f"expected {self.grid.N + 1} values, got shape {vals.shape}")
        ar = self.grid.ar
        if ar.extended:
            vals = np.array([ar.scalar(v) for v in vals], dtype=object)
        else:
            vals = vals.copy()
        bad = [i for i, v in enumerate(vals) if not ar.isfinite(v)]
        if bad:
            raise ValueError(f"non-finite grid value at node {bad[0]}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def precision(self) -> Precision:
        return self.grid.precision

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        # bit-exact: same grid, same mode, identical values
        if not isinstance(other, GridFunction):
            return NotImplemented
        return (other.precision is self.precision and other.grid == self.grid
                and all(a == b for a, b in zip(self.values, other.values)))

    __hash__ = None

    def __getitem__(self, i):
        return self.values[i]

    def _check(self, other: "GridFunction"):
        if other.precision is not self.precision:
            raise PrecisionMismatch("grid functions use different precision modes")
        if other.grid != self.grid:
            raise ValueError("grid functions live on different grids")

    def __add__(self, other):
        self._check(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return GridFunction(self.grid, self.values - other.values)

    def __rmul__(self, c):
        return GridFunction(self.grid, self.grid.ar.scalar(c) * self.values)

    def __neg__(self):
        return GridFunction(self.grid, -self.values)


def max_norm(g: GridFunction):
    """Largest absolute value over the grid."""
    return max(abs(v) for v in g.values)


def restrict_to_coarse(g_fine: GridFunction) -> GridFunction:
    """Keep every second node of a grid with 2N intervals."""
    return GridFunction(g_fine.grid.coarsen(), g_fine.values[::2])


def sample(grid: UniformGrid, g: Callable) -> GridFunction:
    """Evaluate ``g`` (called with scalars of the grid's mode) at every node."""
    ar = grid.ar
    out = []
    for i, x in enumerate(grid.nodes):
        try:
            v = g(x)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise SampleError(f"cannot sample at node {i} (x = {ar.to_float(x):g}): {exc}") from exc
        v = ar.scalar(v)
        if not ar.isfinite(v):
            raise SampleError(f"non-finite value {v} at node {i} (x = {ar.to_float(x):g})")
        out.append(v)
    return GridFunction(grid, ar.array(out))
