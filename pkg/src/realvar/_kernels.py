"""Integer index kernels shared by the polynomial and moment code.

Every kernel exists twice: a numba ``@njit`` version and a vectorised numpy
version with identical results.  Set ``REALVAR_NO_NUMBA=1`` to force the numpy
path (useful for debugging and for environments without a working LLVM).
"""

import os

import numpy as np
from scipy.special import comb

try:
    import numba as nb
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    nb = None

USE_NUMBA = nb is not None and os.environ.get("REALVAR_NO_NUMBA", "0") not in ("1", "true", "yes")


def _binom_table(size):
    table = np.zeros((size + 1, size + 1), dtype=np.int64)
    for a in range(size + 1):
        table[a, 0] = 1
        for b in range(1, a + 1):
            table[a, b] = table[a - 1, b - 1] + table[a - 1, b]
    return table


def grlex_rank_numpy(exps):
    """Position of each exponent row in the graded order used everywhere.

    Degree first; inside one degree, larger leading exponents come first
    (so ``x1`` precedes ``x2`` and ``x1**2`` precedes ``x1*x2``).
    """
    exps = np.asarray(exps, dtype=np.int64)
    if exps.ndim == 1:
        exps = exps[None, :]
    k, n = exps.shape
    deg = exps.sum(axis=1)
    # monomials of degree < d in n variables: C(n + d - 1, n)
    rank = np.where(deg > 0, comb(n + deg - 1, n, exact=False), 0.0)
    remaining = deg.copy()
    for i in range(n - 1):
        left = remaining - exps[:, i]
        tail = n - i - 1
        # vectors on the remaining positions with a larger entry at i
        cnt = np.where(left >= 1, comb(left - 1 + tail, tail, exact=False), 0.0)
        rank = rank + cnt
        remaining = left
    return np.rint(rank).astype(np.int64)


if nb is not None:

    @nb.njit(cache=True)
    def _grlex_rank_nb(exps, table):
        k, n = exps.shape
        out = np.empty(k, dtype=np.int64)
        for r in range(k):
            d = 0
            for i in range(n):
                d += exps[r, i]
            acc = 0
            if d > 0:
                acc = table[n + d - 1, n]
            remaining = d
            for i in range(n - 1):
                left = remaining - exps[r, i]
                if left >= 1:
                    tail = n - i - 1
                    acc += table[left - 1 + tail, tail]
                remaining = left
            out[r] = acc
        return out

    @nb.njit(cache=True)
    def _hankel_nb(y, idx):
        d = idx.shape[0]
        out = np.empty((d, d))
        for a in range(d):
            for b in range(d):
                out[a, b] = y[idx[a, b]]
        return out

    @nb.njit(cache=True)
    def _hankel_stack_nb(ys, idx):
        k = ys.shape[0]
        d = idx.shape[0]
        out = np.empty((k, d, d))
        for j in range(k):
            row = ys[j]
            for a in range(d):
                for b in range(d):
                    out[j, a, b] = row[idx[a, b]]
        return out


def grlex_rank(exps):
    exps = np.ascontiguousarray(np.atleast_2d(np.asarray(exps, dtype=np.int64)))
    if not USE_NUMBA or exps.shape[0] == 0:
        return grlex_rank_numpy(exps)
    n = exps.shape[1]
    top = int(exps.sum(axis=1).max()) + n + 1
    return _grlex_rank_nb(exps, _binom_table(top))


def hankel(y, idx):
    """Symmetric matrix with entry ``(a, b) = y[idx[a, b]]``."""
    y = np.asarray(y, dtype=float)
    if USE_NUMBA and idx.size:
        return _hankel_nb(np.ascontiguousarray(y), np.ascontiguousarray(idx))
    return y[idx]


def hankel_stack(ys, idx):
    """``hankel`` applied to every row of ``ys``; shape ``(k, d, d)``."""
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    if USE_NUMBA and idx.size and ys.shape[0]:
        return _hankel_stack_nb(np.ascontiguousarray(ys), np.ascontiguousarray(idx))
    return ys[:, idx]
