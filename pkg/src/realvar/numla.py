"""Dense linear algebra with explicit rank tolerances."""

import logging
import os
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

log = logging.getLogger(__name__)

DEFAULT_RELATIVE = 1e-8


class LinAlgFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class RankTolerance:
    """Threshold for singular values.

    ``absolute`` wins when set; otherwise ``relative * sigma_max * max(rows, cols)``,
    or ``relative * sigma_max`` when ``size_scaled`` is off.
    """

    relative: float = DEFAULT_RELATIVE
    absolute: float = None
    size_scaled: bool = True

    @classmethod
    def from_env(cls):
        raw = os.environ.get("REALVAR_RANK_TOL")
        return cls(relative=float(raw)) if raw else cls()

    def threshold(self, sigma_max, shape):
        if self.absolute is not None:
            return float(self.absolute)
        factor = max(shape) if self.size_scaled else 1
        return float(self.relative * sigma_max * factor)


@dataclass(frozen=True)
class RankDecision:
    rank: int
    singular_values: np.ndarray = field(repr=False)
    threshold_used: float

    def gap_ratio(self):
        """sigma_rank / sigma_{rank+1}; ``inf`` when there is no trailing value."""
        s = self.singular_values
        if self.rank == 0 or self.rank >= len(s) or s[self.rank] == 0:
            return np.inf
        return s[self.rank - 1] / s[self.rank]


def _as_tol(tol):
    if tol is None:
        return RankTolerance()
    if isinstance(tol, RankTolerance):
        return tol
    return RankTolerance(relative=float(tol))


def _svd(A, compute_uv=True):
    # the full V is needed only for wide matrices; U is never needed in full
    A = np.asarray(A, dtype=float)
    full = compute_uv and A.shape[0] < A.shape[1]
    if not np.all(np.isfinite(A)):
        raise LinAlgFailure(f"non-finite entries in {A.shape[0]}x{A.shape[1]} matrix")
    try:
        return sla.svd(A, full_matrices=full, compute_uv=compute_uv, lapack_driver="gesdd")
    except (np.linalg.LinAlgError, ValueError):
        try:
            return sla.svd(A, full_matrices=full, compute_uv=compute_uv, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise LinAlgFailure(f"SVD did not converge for {A.shape[0]}x{A.shape[1]} matrix") from exc


def _decide(s, shape, tol):
    smax = float(s[0]) if len(s) else 0.0
    thr = tol.threshold(smax, shape)
    rank = int(np.sum(s > thr)) if smax > 0 else 0
    return RankDecision(rank, np.asarray(s), thr)


def numeric_rank(A, tol=None):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        raise ValueError("empty matrix")
    tol = _as_tol(tol)
    s = _svd(A, compute_uv=False)
    return _decide(s, A.shape, tol)


def nullspace_basis(A, tol=None, return_decision=False):
    """Orthonormal rows spanning the numerical kernel of ``A``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[1] == 0:
        raise ValueError("matrix without columns")
    tol = _as_tol(tol)
    if A.shape[0] == 0:
        basis = np.eye(A.shape[1])
        dec = RankDecision(0, np.zeros(0), 0.0)
    else:
        _, s, vt = _svd(A)
        dec = _decide(s, A.shape, tol)
        basis = vt[dec.rank:]
    return (basis, dec) if return_decision else basis


def row_space_basis(A, tol=None, return_decision=False):
    """Orthonormal rows spanning the numerical row space of ``A``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    tol = _as_tol(tol)
    if A.shape[0] == 0:
        basis = np.zeros((0, A.shape[1]))
        dec = RankDecision(0, np.zeros(0), 0.0)
    else:
        _, s, vt = _svd(A, compute_uv=True)
        dec = _decide(s, A.shape, tol)
        basis = vt[:dec.rank]
    return (basis, dec) if return_decision else basis


def rref_partial_pivot(A, tol=None):
    """Reduced row echelon form by Gauss-Jordan with partial pivoting.

    A column becomes a pivot when its largest remaining entry exceeds the same
    threshold ``numeric_rank`` would use, so the pivot count tracks the SVD rank.
    Disagreement between the two is logged as a warning.
    """
    R = np.array(np.atleast_2d(A), dtype=float)
    if R.size == 0:
        raise ValueError("empty matrix")
    tol = _as_tol(tol)
    dec = numeric_rank(R, tol)
    thr = dec.threshold_used
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(R[r:, c])))
        if abs(R[p, c]) <= thr:
            R[r:, c] = 0.0
            continue
        if p != r:
            R[[r, p]] = R[[p, r]]
        R[r] /= R[r, c]
        others = np.arange(rows) != r
        R[others] -= np.outer(R[others, c], R[r])
        R[others, c] = 0.0
        pivots.append(c)
        r += 1
    R[r:] = 0.0
    if len(pivots) != dec.rank:
        warnings.warn(
            f"Gauss-Jordan found {len(pivots)} pivots, SVD rank is {dec.rank}",
            RuntimeWarning,
            stacklevel=2,
        )
    return R, pivots


def symmetric_eig(A, sym_tol=1e-10):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("square matrix required")
    scale = max(np.abs(A).max(), 1.0) if A.size else 1.0
    if np.abs(A - A.T).max(initial=0.0) > sym_tol * scale:
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise LinAlgFailure(f"eigh failed on {A.shape[0]}x{A.shape[0]} matrix") from exc
    return w, V


def principal_angles(A, B):
    """Principal angles (radians) between the row spaces of ``A`` and ``B``."""
    qa = sla.orth(np.atleast_2d(A).T)
    qb = sla.orth(np.atleast_2d(B).T)
    if qa.shape[1] == 0 or qb.shape[1] == 0:
        return np.zeros(0)
    return sla.subspace_angles(qa, qb)


@dataclass
class Cluster:
    value: complex
    size: int
    basis: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)


def _group(vals, tol):
    # transitive closure of |a - b| <= tol
    n = len(vals)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(vals[i] - vals[j]) <= tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def clustered_schur(A, cluster_tol=1e-6):
    """Group eigenvalues into clusters and return an invariant subspace per cluster.

    Each cluster is moved to the leading block of a reordered real Schur form;
    the leading Schur vectors span its invariant subspace.  Complex-conjugate
    pairs are kept as a single real 2x2 block, so a pair shows up as one
    cluster of size 2 whose ``value`` has positive imaginary part.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("square matrix required")
    n = A.shape[0]
    if n == 0:
        return []
    try:
        T, Z = sla.schur(A, output="real")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise LinAlgFailure(f"Schur factorization failed on {n}x{n} matrix") from exc
    vals = sla.eigvals(T)
    tol = cluster_tol * (1.0 + np.linalg.norm(A, 2))
    # a conjugate pair joins the cluster of its positive-imaginary partner
    keys = np.where(np.abs(vals.imag) > tol, vals.real + 1j * np.abs(vals.imag), vals.real + 0j)
    groups = _group(keys, tol)
    groups.sort(key=lambda g: (float(np.mean(keys[g].real)), float(np.mean(keys[g].imag))))
    clusters = []
    for g in groups:
        center = complex(np.mean(keys[g]))
        members = keys[g]

        def select(re, im, members=members):
            z = re + 1j * abs(im)
            return bool(np.min(np.abs(members - z)) <= 0.5 * tol)

        try:
            Ts, Zs, sdim = sla.schur(A, output="real", sort=select)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise LinAlgFailure("reordering the Schur form failed") from exc
        if sdim != len(g):
            raise LinAlgFailure(f"cluster of size {len(g)} reordered into a block of size {sdim}")
        ev = sla.eigvals(Ts[:sdim, :sdim]) if sdim else np.zeros(0)
        clusters.append(Cluster(value=center, size=len(g), basis=Zs[:, :sdim], eigenvalues=ev))
    return clusters
