"""Time the double-double matrix-vector product: compiled, numpy fallback, mpmath objects.

    python benchmarks/bench_kernels.py [--sizes 65 129 257 513] [--repeat 5]

The compiled and numpy results are also checked for bit-identity.
"""
import argparse
import timeit

import numpy as np

from lane8 import kernels
from lane8.kernels import fallback
from lane8.realgrid import Precision

try:
    from lane8.kernels._dd import dd_matvec as compiled
except ImportError:
    compiled = None


def _operands(n, rng):
    ar = Precision.EXTENDED.arith
    A = np.array([[ar.scalar(v) / 3 for v in row] for row in rng.standard_normal((n, n))], dtype=object)
    x = np.array([ar.scalar(v) / 7 for v in rng.standard_normal(n)], dtype=object)
    return A, x


def _best(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[65, 129, 257, 513])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-mpmath-above", type=int, default=257)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    print(f"default backend: {kernels.BACKEND}")
    print(f"{'n':>5} {'compiled':>12} {'numpy':>12} {'mpmath':>12} {'numpy/compiled':>15} {'identical':>10}")
    for n in args.sizes:
        A, x = _operands(n, rng)
        ah, al = kernels.split_values(A)
        xh, xl = kernels.split_values(x)
        t_np = _best(lambda: fallback.dd_matvec(ah, al, xh, xl), args.repeat)
        t_c = same = None
        if compiled is not None:
            t_c = _best(lambda: compiled(ah, al, xh, xl), args.repeat)
            a, b = compiled(ah, al, xh, xl), fallback.dd_matvec(ah, al, xh, xl)
            same = all(np.array_equal(p, q) for p, q in zip(a, b))
        t_mp = None
        if n <= args.skip_mpmath_above:
            t_mp = _best(lambda: A.dot(x), max(1, args.repeat // 2))

        def ms(t):
            return f"{1e3 * t:10.3f}ms" if t is not None else f"{'-':>12}"

        ratio = f"{t_np / t_c:15.1f}" if t_c else f"{'-':>15}"
        print(f"{n:5d} {ms(t_c)} {ms(t_np)} {ms(t_mp)} {ratio} {str(same):>10}")


if __name__ == "__main__":
    main()
