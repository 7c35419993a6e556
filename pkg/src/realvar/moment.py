"""Moment matrices of truncated linear functionals and the G_t / G_t+ matrices."""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from realvar import numla
from realvar._kernels import grlex_rank, hankel, hankel_stack
from realvar.polycore import (
    Polynomial,
    coefficient_matrix,
    monomial_exponents,
    n_monomials,
    prolongation_matrix,
)

__all__ = [
    "LinearFunctional",
    "GtSystem",
    "moment_index",
    "moment_matrix",
    "moment_matrices",
    "h_matrix",
    "build_St",
    "st_matrix",
    "assemble_G",
    "PLUS_RULES",
    "flat_extension_check",
]


@dataclass(frozen=True)
class LinearFunctional:
    """Truncated functional on ``R[x]_order`` stored as its moments ``y_a = L(x^a)``."""

    n: int
    order: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (n_monomials(self.n, self.order),):
            raise ValueError(f"expected {n_monomials(self.n, self.order)} moments, got {vals.shape}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls, n, order):
        return cls(n, order, np.zeros(n_monomials(n, order)))

    @classmethod
    def evaluation(cls, point, order, weight=1.0):
        point = np.asarray(point, dtype=float)
        exps = monomial_exponents(len(point), order)
        return cls(len(point), order, weight * np.prod(point[None, :] ** exps, axis=1))

    def apply(self, p):
        return float(p.coefficient_vector(self.order) @ self.values)

    def project(self, s):
        """Restriction to ``R[x]_s``."""
        return LinearFunctional(self.n, s, self.values[: n_monomials(self.n, s)])

    def __add__(self, other):
        return LinearFunctional(self.n, self.order, self.values + other.values)


@lru_cache(maxsize=None)
def moment_index(n, s):
    """``idx[a, b]`` = graded position of ``alpha_a + alpha_b`` for ``|alpha| <= s``."""
    exps = monomial_exponents(n, s)
    d = len(exps)
    sums = (exps[:, None, :] + exps[None, :, :]).reshape(-1, n)
    idx = grlex_rank(sums).reshape(d, d)
    idx.setflags(write=False)
    return idx


def _order_of(n, length):
    t = 0
    while n_monomials(n, t) < length:
        t += 1
    return t


def moment_matrix(L, s):
    if 2 * s > L.order:
        raise ValueError(f"M_{s} needs moments up to degree {2 * s}, functional has order {L.order}")
    return hankel(L.values, moment_index(L.n, s))


def moment_matrices(values, n, s):
    """Stack of ``M_s`` for each row of ``values`` (rows are moment vectors)."""
    values = np.atleast_2d(values)
    if _order_of(n, values.shape[1]) < 2 * s:
        raise ValueError("moment vectors too short for the requested order")
    return hankel_stack(values, moment_index(n, s))


def h_matrix(sys, t, normalize=True):
    """Coefficient matrix of ``H_t`` over ``T^n_t``; rows follow ``prolong_generators``."""
    if t < sys.D:
        raise ValueError(f"order t={t} is below D={sys.D}")
    blocks = []
    for h in sys.generators:
        row = h.coefficient_vector(h.degree)
        if normalize:
            row = row / np.linalg.norm(row)
        blocks.append(prolongation_matrix(row, sys.n, h.degree, t - h.degree, t_out=t))
    return np.vstack(blocks)


def st_matrix(kernel_rows, n, t):
    """Rows ``x^a g`` for ``|a| <= floor(t/2)`` and each kernel row ``g`` over ``T^n_{floor(t/2)}``."""
    s0 = t // 2
    kernel_rows = np.atleast_2d(np.asarray(kernel_rows, dtype=float))
    if kernel_rows.shape[0] == 0:
        return np.zeros((0, n_monomials(n, t)))
    if kernel_rows.shape[1] != n_monomials(n, s0):
        raise ValueError("kernel polynomials must be given over T^n_{floor(t/2)}")
    return prolongation_matrix(kernel_rows, n, s0, s0, t_out=t)


def build_St(kernel_polys, t):
    """``S_t`` as polynomials; duplicates removed."""
    kernel_polys = list(kernel_polys)
    if not kernel_polys:
        return []
    n = kernel_polys[0].n
    s0 = t // 2
    for g in kernel_polys:
        if g.degree > s0:
            raise ValueError(f"kernel polynomial of degree {g.degree} exceeds floor(t/2)={s0}")
    rows = coefficient_matrix(kernel_polys, n, s0)
    out, seen = [], set()
    for row in st_matrix(rows, n, t):
        p = Polynomial.from_vector(row, n, drop_tol=0.0)
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


@dataclass
class GtSystem:
    """Coefficient matrices of ``G_t = H_t ∪ S_t`` and of its prolongation ``G_t+``.

    ``s_rows`` is an orthonormal row basis of ``span S_t`` (empty in complex mode);
    ``g_rows`` is a row basis of ``G_t`` scaled by its singular values, and
    ``g_plus`` holds those rows and their ``x_i`` multiples, which spans the same
    space as ``(H_t ∪ S_t)+``.
    """

    n: int
    t: int
    h_rows: np.ndarray = field(repr=False)
    s_rows: np.ndarray = field(repr=False)
    g_rows: np.ndarray = field(repr=False)
    g_plus: np.ndarray = field(repr=False)
    kernel: np.ndarray = field(default=None, repr=False)
    kernel_plus: np.ndarray = field(default=None, repr=False)

    @property
    def G(self):
        return np.vstack([self.h_rows, self.s_rows])


PLUS_RULES = ("prolonged", "top")


def assemble_G(sys, t, kernel_polys=(), mode="real", tol=None, plus_rule="prolonged"):
    """Stack ``[H_t; S_t]`` and build the one-step prolongation ``G_t+``.

    ``plus_rule="prolonged"`` multiplies every row of ``G_t`` by ``1, x_1..x_n``.
    ``"top"`` multiplies only the generator rows of degree exactly ``t``
    (``x^a h_j`` and ``x^a g`` as stored, before orthogonalisation), which
    yields ``H_{t+1}``, all of ``S_t`` and the shifts of those ``x^a g`` that
    reach degree ``t``.  It is a subset of the full prolongation, so it can only
    enlarge the ``G_t+`` dimensions; it is kept to compare with published
    tables computed that way.
    """
    if mode not in ("real", "complex"):
        raise ValueError(f"unknown mode {mode!r}")
    if plus_rule not in PLUS_RULES:
        raise ValueError(f"unknown plus_rule {plus_rule!r}")
    n = sys.n
    h_rows = h_matrix(sys, t)
    s_rows = np.zeros((0, n_monomials(n, t)))
    krows = np.zeros((0, n_monomials(n, t // 2)))
    if mode == "real" and len(kernel_polys):
        if isinstance(kernel_polys, np.ndarray):
            krows = np.atleast_2d(kernel_polys)
        else:
            krows = coefficient_matrix(list(kernel_polys), n, t // 2)
        s_rows = numla.row_space_basis(st_matrix(krows, n, t), tol)
    G = np.vstack([h_rows, s_rows])
    kernel, row_basis = _kernel_and_rows(G, tol)
    if plus_rule == "prolonged":
        plus = prolongation_matrix(row_basis, n, t, 1)
    else:
        plus = _top_plus(sys, t, krows, s_rows)
    kernel_plus, _ = _kernel_and_rows(plus, tol)
    return GtSystem(n, t, h_rows, s_rows, row_basis, plus, kernel, kernel_plus)


def _top_plus(sys, t, krows, s_rows, deg_tol=1e-8):
    n, s0 = sys.n, t // 2
    pad = np.zeros((s_rows.shape[0], n_monomials(n, t + 1) - s_rows.shape[1]))
    blocks = [h_matrix(sys, t + 1), np.hstack([s_rows, pad])]
    if krows.shape[0] and 2 * s0 == t:
        # kernel rows of full degree s0 give rows x^a g of degree t when |a| = s0
        lo = n_monomials(n, s0 - 1)
        top = np.linalg.norm(krows[:, lo:], axis=1) > deg_tol * np.linalg.norm(krows, axis=1)
        if np.any(top):
            blocks.append(prolongation_matrix(krows[top], n, s0, s0 + 1, t_out=t + 1))
    return np.vstack(blocks)


def _kernel_and_rows(A, tol):
    # row basis keeps its singular values so weak directions stay weak when prolonged
    if A.shape[0] == 0:
        return np.eye(A.shape[1]), np.zeros((0, A.shape[1]))
    _, s, vt = numla._svd(A)
    dec = numla._decide(s, A.shape, numla._as_tol(tol))
    return vt[dec.rank:], s[: dec.rank, None] * vt[: dec.rank]


def flat_extension_check(L, s, tol=None):
    """True when ``rank M_s(L) == rank M_{s-1}(L)``."""
    if s < 1:
        raise ValueError("s must be at least 1")
    if 2 * s > L.order:
        raise ValueError("order too small")
    Ms = moment_matrix(L, s)
    if not np.any(Ms):
        return True
    r1 = numla.numeric_rank(Ms, tol).rank
    r0 = numla.numeric_rank(Ms[: n_monomials(L.n, s - 1), : n_monomials(L.n, s - 1)], tol).rank
    return r1 == r0
