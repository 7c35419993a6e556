"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N] [--solve NAME]

``--solve`` also times a full ``realvar solve`` in a subprocess with and
without ``REALVAR_NO_NUMBA=1``; that number includes interpreter start-up and
numba's cached compilation.
"""

import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from realvar import _kernels
from realvar.moment import moment_index
from realvar.polycore import monomial_exponents, n_monomials


def _best(fn, repeat):
    fn()  # warm up (triggers numba compilation)
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def cases():
    rng = np.random.default_rng(0)
    for n, t in ((3, 8), (6, 6)):
        exps = np.ascontiguousarray(monomial_exponents(n, t))
        table = _kernels._binom_table(int(exps.sum(axis=1).max()) + n + 1)
        yield (f"grlex_rank n={n} t={t} ({len(exps)} rows)",
               lambda e=exps, tb=table: _kernels._grlex_rank_nb(e, tb),
               lambda e=exps: _kernels.grlex_rank_numpy(e))
    for n, s in ((3, 3), (6, 3)):
        idx = np.ascontiguousarray(moment_index(n, s))
        y = rng.standard_normal(n_monomials(n, 2 * s))
        ys = rng.standard_normal((200, n_monomials(n, 2 * s)))
        yield (f"hankel n={n} s={s} ({idx.shape[0]}x{idx.shape[0]})",
               lambda y=y, i=idx: _kernels._hankel_nb(y, i),
               lambda y=y, i=idx: y[i])
        yield (f"hankel_stack n={n} s={s} (200 matrices)",
               lambda ys=ys, i=idx: _kernels._hankel_stack_nb(ys, i),
               lambda ys=ys, i=idx: ys[:, i])


def time_solve(name):
    out = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, REALVAR_NO_NUMBA=flag)
        t0 = time.perf_counter()
        subprocess.run([sys.executable, "-m", "realvar.cli", "solve", name], env=env, check=True,
                       stdout=subprocess.DEVNULL)
        out[label] = time.perf_counter() - t0
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=20)
    p.add_argument("--solve", metavar="NAME", help="also time a full solve of a corpus system")
    args = p.parse_args(argv)
    if _kernels.nb is None:
        sys.exit("numba is not installed")
    print(f"{'kernel':44s} {'numba':>10s} {'numpy':>10s} {'ratio':>7s}")
    for label, fast, slow in cases():
        assert np.array_equal(fast(), slow())
        a, b = _best(fast, args.repeat), _best(slow, args.repeat)
        print(f"{label:44s} {a * 1e6:8.1f}us {b * 1e6:8.1f}us {b / a:7.2f}")
    if args.solve:
        t = time_solve(args.solve)
        print(f"{'solve ' + args.solve:44s} {t['numba']:9.2f}s {t['numpy']:9.2f}s {t['numpy'] / t['numba']:7.2f}")


if __name__ == "__main__":
    main()
