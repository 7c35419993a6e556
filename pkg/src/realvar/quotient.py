"""Quotient-ring bases, border bases and multiplication matrices."""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from realvar import numla
from realvar.polycore import (
    Monomial,
    Polynomial,
    border,
    is_connected_to_1,
    monomials_up_to,
    n_monomials,
)
from realvar._kernels import grlex_rank

log = logging.getLogger(__name__)

__all__ = [
    "QuotientError",
    "QuotientBasis",
    "BorderBasis",
    "MultiplicationSystem",
    "evaluation_matrix",
    "select_basis_greedy",
    "select_basis_pivots",
    "border_basis",
    "multiplication_matrices",
    "commutativity_error",
]


class QuotientError(RuntimeError):
    """Numerical evidence that the stopping conditions did not really hold."""


@dataclass
class QuotientBasis:
    """Monomial basis ``B`` of the quotient and the evaluation matrix ``Y``.

    ``Y`` has one row per functional (a basis of the projected kernel) and one
    column per monomial of ``T^n_s``.
    """

    n: int
    s: int
    monomials: list
    Y: np.ndarray = field(repr=False)
    columns: list = field(repr=False)
    condition: float = np.nan
    tol: numla.RankTolerance = field(default_factory=numla.RankTolerance, repr=False)

    def __len__(self):
        return len(self.monomials)

    def index(self, m):
        return self.monomials.index(m)


@dataclass
class BorderBasis:
    """``f_m = m - phi(m)`` for every border monomial; ``coords[m]`` holds phi(m) in ``B``."""

    basis: QuotientBasis
    coords: dict = field(repr=False)
    residuals: dict = field(repr=False)

    @property
    def elements(self):
        n = self.basis.n
        out = {}
        for m, lam in self.coords.items():
            terms = {m: 1.0}
            for b, c in zip(self.basis.monomials, lam):
                if c != 0.0:
                    terms[b] = terms.get(b, 0.0) - c
            out[m] = Polynomial(terms, n)
        return out

    def format(self, names=None, precision=6, drop_below=1e-12):
        return [self.elements[m].format(names, precision, drop_below, lead=m) for m in self.coords]

    def max_residual(self):
        return max(self.residuals.values(), default=0.0)


@dataclass
class MultiplicationSystem:
    matrices: list = field(repr=False)
    commutativity_error: float

    @property
    def n(self):
        return len(self.matrices)


def evaluation_matrix(kernel_rows, n, s, tol=None):
    """Row-compressed ``Z_s``: the kernel rows truncated to ``T^n_s``.

    The returned rows span the same space as the truncated rows, with the
    numerically zero directions removed.
    """
    K = np.atleast_2d(kernel_rows)
    Z = K[:, : n_monomials(n, s)]
    if Z.shape[0] == 0:
        return Z
    _, sv, vt = numla._svd(Z, compute_uv=True)
    r = int(np.sum(sv > numla._as_tol(tol).threshold(1.0, K.shape)))
    return sv[:r, None] * vt[:r]


def _finish(Y, n, s, cols, tol):
    mons = monomials_up_to(n, s)
    B = [mons[c] for c in cols]
    if not is_connected_to_1(B):
        raise QuotientError("selected basis is not connected to 1: " + ", ".join(map(str, B)))
    sv = np.linalg.svd(Y[:, cols], compute_uv=False) if cols else np.zeros(0)
    cond = float(sv[0] / sv[-1]) if len(sv) and sv[-1] > 0 else np.inf
    log.debug("quotient basis of size %d, cond(Y_B) = %.3g", len(B), cond)
    return QuotientBasis(n, s, B, Y, list(cols), cond, tol)


def select_basis_greedy(Y, n, s, tol=None):
    """Scan the monomials of degree ``< s`` in graded order; keep the independent ones."""
    tol = numla._as_tol(tol)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[0] == 0:
        raise ValueError("empty evaluation matrix")
    if Y.shape[1] != n_monomials(n, s):
        raise ValueError("Y must have one column per monomial of degree <= s")
    head = n_monomials(n, s - 1)
    thr = tol.threshold(np.linalg.norm(Y, 2), Y.shape)
    Q = np.zeros((Y.shape[0], 0))
    cols = []
    for c in range(head):
        v = Y[:, c] - Q @ (Q.T @ Y[:, c])
        v -= Q @ (Q.T @ v)
        nv = np.linalg.norm(v)
        if nv > thr:
            Q = np.column_stack([Q, v / nv])
            cols.append(c)
    rank = numla.numeric_rank(Y[:, :head], tol).rank
    if rank != len(cols):
        log.warning("greedy basis has %d elements, rank of Y is %d", len(cols), rank)
    return _finish(Y, n, s, cols, tol)


def select_basis_pivots(Y, n, s, tol=None):
    """Pivot columns of a partial-pivoting Gauss-Jordan sweep over the degree ``< s`` columns."""
    tol = numla._as_tol(tol)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[0] == 0:
        raise ValueError("empty evaluation matrix")
    _, pivots = numla.rref_partial_pivot(Y[:, : n_monomials(n, s - 1)], tol)
    return _finish(Y, n, s, pivots, tol)


def border_basis(qb, tol=None, residual_factor=10.0):
    """Solve ``Y_m ~ Y_B lambda`` in the least-squares sense for each border monomial."""
    tol = numla._as_tol(tol) if tol is not None else qb.tol
    n, s = qb.n, qb.s
    Y = qb.Y
    YB = Y[:, qb.columns]
    scale = np.linalg.norm(Y, 2)
    bound = residual_factor * tol.threshold(1.0, Y.shape) * max(scale, 1e-300)
    dB = border(qb.monomials)
    too_high = [m for m in dB if m.degree > s]
    if too_high:
        raise QuotientError(f"border monomial {too_high[0]} exceeds degree {s}")
    cols = grlex_rank(np.array([m.exponents for m in dB]))
    lam, *_ = sla.lstsq(YB, Y[:, cols])
    res = np.linalg.norm(YB @ lam - Y[:, cols], axis=0)
    coords, residuals = {}, {}
    for k, m in enumerate(dB):
        coords[m] = lam[:, k]
        residuals[m] = float(res[k])
    worst = float(res.max(initial=0.0))
    if worst > bound:
        m = dB[int(np.argmax(res))]
        raise QuotientError(f"border monomial {m} not in span of the basis columns: residual {worst:.3g} > {bound:.3g}")
    return BorderBasis(qb, coords, residuals)


def commutativity_error(mats):
    err = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            err = max(err, float(np.abs(mats[i] @ mats[j] - mats[j] @ mats[i]).max(initial=0.0)))
    return err


def multiplication_matrices(qb, bb):
    """``X_i[:, b]`` = coordinates of ``x_i * b`` in ``B``."""
    n, N = qb.n, len(qb)
    pos = {m: k for k, m in enumerate(qb.monomials)}
    mats = []
    for i in range(n):
        xi = Monomial.var(i, n)
        X = np.zeros((N, N))
        for k, b in enumerate(qb.monomials):
            m = b * xi
            if m in pos:
                X[pos[m], k] = 1.0
            else:
                X[:, k] = bb.coords[m]
        mats.append(X)
    return MultiplicationSystem(mats, commutativity_error(mats))
