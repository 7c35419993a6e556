"""Roots from multiplication matrices, with Newton polishing and verification."""

import logging
from dataclasses import dataclass, replace

import numpy as np

from realvar import numla
from realvar.polycore import Monomial

log = logging.getLogger(__name__)

__all__ = ["ExtractionError", "Root", "extract_roots", "verify_roots", "newton_polish", "scaled_residual"]

DEFAULT_IMAG_TOL = 1e-6
DEFAULT_RESIDUAL_TOL = 1e-4


class ExtractionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Root:
    coordinates: tuple
    residual: float
    is_real: bool
    cluster_size: int = 1

    @property
    def point(self):
        c = np.array(self.coordinates, dtype=complex)
        return c.real if self.is_real else c

    def to_json(self, seed=None):
        coords = [
            float(z.real) if self.is_real else [float(z.real), float(z.imag)]
            for z in np.asarray(self.coordinates, dtype=complex)
        ]
        return {
            "coords": coords,
            "residual": float(self.residual),
            "is_real": bool(self.is_real),
            "cluster_size": int(self.cluster_size),
            "seed": seed,
        }


def _imag_ok(v, imag_tol):
    v = np.asarray(v, dtype=complex)
    return bool(np.all(np.abs(v.imag) <= imag_tol * (1.0 + np.abs(v))))


def _make_root(v, sys, size, imag_tol):
    v = np.asarray(v, dtype=complex)
    real = _imag_ok(v, imag_tol)
    if real:
        v = v.real.astype(complex)
    res = sys.residual(v.real if real else v) if sys is not None else np.nan
    return Root(tuple(complex(z) for z in v), float(res), real, int(size))


def _cluster_points(X_T, Q, A, one, real=None):
    """Joint eigenvalues of the ``X_j^T`` restricted to the invariant subspace ``Q``.

    Returns a list of ``(point, multiplicity)``; a complex block yields the
    conjugate pair.  ``real`` forces the real reading (mean of each restricted
    operator's spectrum), which is the accurate one for a multiple real root
    whose eigenvalues scattered off the axis.
    """
    k = Q.shape[1]
    AQ = Q.T @ A @ Q
    w, W = np.linalg.eig(AQ)
    if real is None:
        real = bool(np.all(np.abs(w.imag) <= 1e-12 * (1 + np.abs(w))))
    if real:
        # real cluster: average eigenvalue of each restricted operator
        point = np.array([np.trace(Q.T @ XT @ Q) / k for XT in X_T], dtype=complex)
        spread = max(np.abs(np.linalg.eigvals(Q.T @ XT @ Q) - p).max() for XT, p in zip(X_T, point))
        return [(point, k)], spread
    pos = np.flatnonzero(w.imag > 0)
    pts = []
    for j in pos:
        u = Q @ W[:, j]
        if abs(u[one]) > 0:
            u = u / u[one]
        uu = np.vdot(u, u)
        pts.append(np.array([np.vdot(u, XT @ u) / uu for XT in X_T]))
    point = np.mean(pts, axis=0)
    spread = max(float(np.abs(p - point).max()) for p in pts)
    return [(point, len(pos)), (point.conj(), len(pos))], spread


def _candidates(A, X_T, one, sys, cluster_tol, imag_tol, multiple=False):
    roots, worst = [], 0.0
    # same absolute tolerance clustered_schur groups with
    axis = cluster_tol * (1.0 + np.linalg.norm(A, 2))
    for cl in numla.clustered_schur(A, cluster_tol):
        real = True if multiple and cl.size > 1 and abs(cl.value.imag) <= axis else None
        pts, spread = _cluster_points(X_T, cl.basis, A, one, real)
        worst = max(worst, spread)
        roots.extend(_make_root(p, sys, k, imag_tol) for p, k in pts)
    return roots, worst


def _coarser(A, X_T, one, sys, cluster_tol, imag_tol, residual_tol, ceiling=0.1):
    """Widen the cluster tolerance until every cluster mean passes the residual gate.

    The eigenvalues of a k-fold root scatter like ``eps**(1/k)`` under a
    perturbation ``eps`` while their mean stays accurate, so a multiple root
    needs a far coarser grouping than a simple one.  Returns ``None`` when no
    tolerance up to ``ceiling`` works.
    """
    tol = cluster_tol
    while tol < ceiling:
        tol *= 10.0
        try:
            roots, _ = _candidates(A, X_T, one, sys, tol, imag_tol, multiple=True)
        except numla.LinAlgFailure:
            continue
        if all(scaled_residual(sys, r.point) <= residual_tol for r in roots):
            log.info("grouped eigenvalues at cluster tolerance %.0e", tol)
            return roots
    return None


def extract_roots(ms, qb, seed=0, sys=None, cluster_tol=1e-6, merge_tol=1e-4, retries=3,
                  imag_tol=DEFAULT_IMAG_TOL, residual_tol=DEFAULT_RESIDUAL_TOL):
    """Eigen-decompose a random combination ``sum c_i X_i^T`` and read off the joint eigenvalues.

    A cluster whose restricted operators disagree by more than ``merge_tol``
    (relative to ``1 + max ||X_i||``) means two roots collided under the random
    combination; a new combination is drawn, at most ``retries`` times.  When
    ``sys`` is given and some candidate misses the residual gate, coarser
    eigenvalue groupings are tried (multiple roots); the fine grouping is kept
    when none helps.
    """
    n = ms.n
    X_T = [X.T for X in ms.matrices]
    try:
        one = qb.index(Monomial.one(n))
    except ValueError as exc:
        raise ExtractionError("basis does not contain 1") from exc
    scale = 1.0 + max(np.linalg.norm(X, 2) for X in ms.matrices)
    rng = np.random.default_rng(seed)
    last = None
    for attempt in range(retries + 1):
        c = rng.standard_normal(n)
        c /= np.linalg.norm(c)
        A = sum(ci * XT for ci, XT in zip(c, X_T))
        try:
            roots, worst = _candidates(A, X_T, one, sys, cluster_tol, imag_tol)
        except numla.LinAlgFailure as exc:
            last = exc
            continue
        if worst <= merge_tol * scale:
            if sys is not None and any(scaled_residual(sys, r.point) > residual_tol for r in roots):
                return _coarser(A, X_T, one, sys, cluster_tol, imag_tol, residual_tol) or roots
            return roots
        last = ExtractionError(f"clusters mix distinct roots (spread {worst:.3g}) after {attempt + 1} combinations")
        log.info("random combination %d merged roots, retrying", attempt)
    raise ExtractionError(str(last))


def scaled_residual(sys, v):
    """``max_j |h_j(v)| / (||h_j||_1 * max(1, |v|_inf)^deg h_j)``."""
    v = np.asarray(v)
    big = max(1.0, float(np.max(np.abs(v)))) if v.size else 1.0
    out = 0.0
    for h in sys.generators:
        norm1 = float(np.sum(np.abs(h.coeff_array())))
        out = max(out, abs(h.evaluate(v)) / (norm1 * big**h.degree))
    return out


def _square_subsystem(sys):
    if sys.m <= sys.n:
        return list(sys.generators)
    # the n generators whose top-degree part has the largest coefficients
    def lead(h):
        return max(abs(c) for m, c in h.terms.items() if m.degree == h.degree)

    order = sorted(range(sys.m), key=lambda j: -lead(sys.generators[j]))
    return [sys.generators[j] for j in sorted(order[: sys.n])]


def newton_polish(sys, v, steps=1):
    """Newton steps on a square subsystem; returns the input when a step does not help."""
    v = np.asarray(v)
    gens = _square_subsystem(sys)
    grads = [h.gradient() for h in gens]
    cur, cur_res = v, sys.residual(v)
    for _ in range(steps):
        F = np.array([h.evaluate(cur) for h in gens])
        J = np.array([[g.evaluate(cur) for g in row] for row in grads])
        try:
            if J.shape[0] == J.shape[1]:
                step = np.linalg.solve(J, F)
            else:
                step = np.linalg.lstsq(J, F, rcond=None)[0]
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        nxt = cur - step
        res = sys.residual(nxt)
        if res >= cur_res:
            break
        cur, cur_res = nxt, res
    return cur


def verify_roots(roots, sys, mode="real", imag_tol=DEFAULT_IMAG_TOL, residual_tol=DEFAULT_RESIDUAL_TOL,
                 refine=True, newton_steps=1, check_residual=False):
    """Polish and filter candidate roots against the original generators.

    Returns ``(accepted, rejected)``.  Real mode keeps roots that are real
    within ``imag_tol * (1 + |v|)`` and whose scaled residual is below
    ``residual_tol``; complex mode keeps everything unless ``check_residual``.
    """
    accepted, rejected = [], []
    for r in roots:
        v = np.asarray(r.coordinates, dtype=complex)
        real = _imag_ok(v, imag_tol)
        if mode == "real" and not real:
            rejected.append(r)
            continue
        pt = v.real if real else v
        if refine:
            pt = newton_polish(sys, pt, newton_steps)
        res = sys.residual(pt)
        root = replace(r, coordinates=tuple(complex(z) for z in np.asarray(pt, dtype=complex)),
                       residual=float(res), is_real=real)
        if (mode == "real" or check_residual) and scaled_residual(sys, pt) > residual_tol:
            rejected.append(root)
        else:
            accepted.append(root)
    return accepted, rejected
