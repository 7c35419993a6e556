"""Maximum-rank positive elements of the moment cone ``K_{t,psd}``.

The cone is ``{L in H_t^perp : M_{floor(t/2)}(L) psd}``.  A point in its
relative interior is found by facial reduction: solve
``max gamma  s.t.  M - gamma*I psd, trace M = 1`` over the current face; when the
optimum is zero the dual solution exposes common kernel directions of every
feasible moment matrix, those directions are imposed as linear constraints and
the problem is re-solved on the smaller face.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from realvar import numla
from realvar.moment import LinearFunctional, h_matrix, moment_matrices
from realvar.polycore import Polynomial, n_monomials

log = logging.getLogger(__name__)

# The moment matrix of a relative-interior point is only known to about the
# square root of the interior point's accuracy on faces of singularity degree
# two (gap ~1e-10 gives ~1e-5), so ranks are read at that level.
MOMENT_RANK_TOL = numla.RankTolerance(relative=1e-5, size_scaled=False)
KERNEL_TAIL_TOL = 1e-6

__all__ = [
    "SDPFailure",
    "SDPResult",
    "solve_sdp",
    "MomentConeProblem",
    "GenericSolution",
    "build_cone_problem",
    "generic_element",
    "rank_profile",
]


class SDPFailure(RuntimeError):
    pass


@dataclass
class SDPResult:
    X: np.ndarray
    y: np.ndarray
    S: np.ndarray
    primal: float
    dual: float
    iterations: int
    status: str


def _chol(A):
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        return None


def _max_step(L, dA):
    # largest a with L L^T + a dA psd (L is a Cholesky factor)
    Linv_dA = sla.solve_triangular(L, dA, lower=True)
    W = sla.solve_triangular(L, Linv_dA.T, lower=True)
    lam = np.linalg.eigvalsh(0.5 * (W + W.T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def solve_sdp(C, F, b, gap_tol=1e-10, feas_tol=1e-10, max_iter=200):
    """Dense primal-dual interior-point method (HKM direction, Mehrotra corrector).

    primal:  min <C, X>   s.t. <F_i, X> = b_i,  X psd
    dual:    max b.y      s.t. S = C - sum_i y_i F_i psd

    Stops when ``|<C,X> - b.y| <= gap_tol * (1 + |<C,X>| + |b.y|)`` with relative
    primal and dual residuals below ``feas_tol``.
    """
    C = np.asarray(C, dtype=float)
    F = np.asarray(F, dtype=float)
    b = np.asarray(b, dtype=float)
    m, d = F.shape[0], C.shape[0]
    Fflat = F.reshape(m, -1)
    normC = np.linalg.norm(C)
    normF = np.linalg.norm(Fflat, axis=1).max(initial=0.0)
    x0 = max(1.0, np.sqrt(d) * np.max(np.abs(b) / (1.0 + np.linalg.norm(Fflat, axis=1)), initial=0.0))
    s0 = max(1.0, (normC + normF) / np.sqrt(d))
    X = x0 * np.eye(d)
    S = s0 * np.eye(d)
    y = np.zeros(m)
    I = np.eye(d)
    status = "max_iter"
    for it in range(1, max_iter + 1):
        rp = b - Fflat @ X.ravel()
        Rd = C - np.tensordot(y, F, axes=1) - S
        pobj = float(np.sum(C * X))
        dobj = float(b @ y)
        mu = float(np.sum(X * S)) / d
        gap = abs(pobj - dobj)
        pinf = np.linalg.norm(rp) / (1.0 + np.linalg.norm(b))
        dinf = np.linalg.norm(Rd) / (1.0 + normC)
        if gap <= gap_tol * (1.0 + abs(pobj) + abs(dobj)) and pinf <= feas_tol and dinf <= feas_tol:
            status = "optimal"
            break
        LS = _chol(S)
        LX = _chol(X)
        if LS is None or LX is None:
            status = "numerical"
            break
        Sinv = sla.cho_solve((LS, True), I)
        Sinv = 0.5 * (Sinv + Sinv.T)
        # Schur complement  M_ij = <F_i, X F_j S^-1>
        G = np.einsum("ab,jbc,cd->jad", X, F, Sinv, optimize=True)
        Msch = Fflat @ G.transpose(0, 2, 1).reshape(m, -1).T
        Msch = 0.5 * (Msch + Msch.T)
        try:
            cf = sla.cho_factor(Msch + 1e-14 * np.trace(Msch) / max(m, 1) * np.eye(m))
            solve = lambda r: sla.cho_solve(cf, r)  # noqa: E731
        except np.linalg.LinAlgError:
            lu = sla.lu_factor(Msch)
            solve = lambda r: sla.lu_solve(lu, r)  # noqa: E731
        XRdSinv = X @ Rd @ Sinv

        def direction(Rc):
            # Rc is the target for  X + dX + X dS S^-1
            rhs = rp - Fflat @ (Rc - X - XRdSinv).ravel()
            dy = solve(rhs)
            dS = Rd - np.tensordot(dy, F, axes=1)
            dX = Rc - X - X @ dS @ Sinv
            dX = 0.5 * (dX + dX.T)
            return dX, dy, dS

        dXa, dya, dSa = direction(np.zeros((d, d)))
        ap = min(1.0, _max_step(LX, dXa))
        ad = min(1.0, _max_step(LS, dSa))
        mu_aff = float(np.sum((X + ap * dXa) * (S + ad * dSa))) / d
        sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0
        Rc = sigma * mu * Sinv - dXa @ dSa @ Sinv
        dX, dy, dS = direction(Rc)
        ap = min(1.0, 0.95 * _max_step(LX, dX))
        ad = min(1.0, 0.95 * _max_step(LS, dS))
        X = X + ap * dX
        X = 0.5 * (X + X.T)
        y = y + ad * dy
        S = S + ad * dS
        S = 0.5 * (S + S.T)
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(S)):
            status = "numerical"
            break
    pobj = float(np.sum(C * X))
    dobj = float(b @ y)
    return SDPResult(X, y, C - np.tensordot(y, F, axes=1), pobj, dobj, it, status)


@dataclass
class MomentConeProblem:
    n: int
    t: int
    kernel_basis: np.ndarray = field(repr=False)
    moment_order: int
    h_rows: np.ndarray = field(repr=False, default=None)


@dataclass
class GenericSolution:
    functional: LinearFunctional
    moment_matrix: np.ndarray = field(repr=False)
    rank_profile: list
    kernel_basis: np.ndarray = field(repr=False)
    kernel_polys: list = field(repr=False)
    face_reductions: int = 0
    min_eigenvalue: float = 0.0
    spectrum: np.ndarray = field(default=None, repr=False)
    ambiguous_gap: bool = False

    @property
    def order(self):
        return self.functional.order

    @property
    def moment_order(self):
        return self.functional.order // 2


def build_cone_problem(sys, t, tol=None):
    if t < sys.D:
        raise ValueError(f"order t={t} is below D={sys.D}")
    H = h_matrix(sys, t)
    kernel = numla.nullspace_basis(H, tol)
    return MomentConeProblem(sys.n, t, kernel, t // 2, H)


def _frobenius_basis(mats, tol):
    flat = mats.reshape(mats.shape[0], -1)
    if flat.shape[0] == 0:
        return np.zeros((0,) + mats.shape[1:]), np.zeros((0, 0))
    u, s, vt = np.linalg.svd(flat, full_matrices=False)
    smax = s[0] if len(s) else 0.0
    r = int(np.sum(s > tol * max(smax, 1e-300))) if smax > 0 else 0
    basis = vt[:r].reshape((r,) + mats.shape[1:])
    coeff = (u[:, :r] / s[:r]).T
    return basis, coeff


def _max_min_eig(B, gap_tol, max_iter):
    """max gamma s.t. sum mu_j B_j - gamma I psd, trace = 1 (B orthonormal, d x d)."""
    r, d = B.shape[0], B.shape[1]
    tr = np.einsum("jaa->j", B)
    if r == 0 or np.linalg.norm(tr) <= 1e-12 * np.sqrt(max(r, 1)):
        return None
    mu0 = tr / (tr @ tr)
    N = sla.null_space(tr[None, :])
    C = np.tensordot(mu0, B, axes=1)
    F = np.concatenate([-np.tensordot(N.T, B, axes=1), np.eye(d)[None]], axis=0)
    bvec = np.zeros(F.shape[0])
    bvec[-1] = 1.0
    res = solve_sdp(C, F, bvec, gap_tol=gap_tol, feas_tol=gap_tol, max_iter=max_iter)
    mu = mu0 + N @ res.y[:-1]
    gamma = float(res.y[-1])
    M = np.tensordot(mu, B, axes=1)
    return gamma, mu, M, res


def _scaled_max_min_eig(B, gap_tol, gamma_tol, max_iter, rounds=2, floor=1e-10):
    """``_max_min_eig`` re-solved in a better conditioned basis when gamma looks small.

    The face of the psd cone met by ``span B`` is invariant under a congruence
    ``T' B T``; the minimum eigenvalue is not.  A definite point of a badly
    scaled moment matrix can have gamma far below ``gamma_tol``, so the
    decision is retaken with ``T = V diag(max(w, floor * w_max))^(-1/2)`` built
    from the eigenpairs ``(w, V)`` of the current iterate.  The rescaled solve
    only ever upgrades the verdict to "definite"; when it agrees the face is
    singular the original solve is returned, since the congruence inflates the
    null directions and spoils the exposure step.  Returns
    ``(gamma, mu, M, res, M_scaled)`` with ``M`` in the original basis.
    """
    out = _max_min_eig(B, gap_tol, max_iter)
    if out is None:
        return None
    gamma, mu, M, res = out
    Ms = M
    Tinv = np.eye(B.shape[1])
    for _ in range(rounds):
        if gamma > gamma_tol:
            break
        w, V = np.linalg.eigh(0.5 * (Ms + Ms.T))
        w = np.maximum(w, floor * max(w.max(), 1e-300))
        if w.max() / w.min() < 1e2:
            break
        T = V / np.sqrt(w)
        Bs = np.einsum("ai,jab,bk->jik", T, B, T, optimize=True)
        trial = _max_min_eig(Bs, gap_tol, max_iter)
        if trial is None:
            break
        g2, mu2, Ms2, res2 = trial
        if res2.status != "optimal" and not abs(res2.primal - res2.dual) <= 1e-6:
            log.debug("congruence rescale (cond %.1e) did not converge; keeping gamma %.3e", w.max() / w.min(), gamma)
            break
        log.debug("congruence rescale (cond %.1e): gamma %.3e -> %.3e", w.max() / w.min(), gamma, g2)
        # B now holds the rescaled matrices; M in the original basis is Tinv' Ms Tinv
        Tinv = (V * np.sqrt(w)).T @ Tinv
        B = Bs
        gamma, mu, res, Ms = g2, mu2, res2, Ms2
        M = Tinv.T @ Ms @ Tinv
    if gamma <= gamma_tol:
        # still singular: expose from the original, better scaled, solve
        return out + (out[2],)
    return gamma, mu, M, res, Ms


def _lift_to_rank(B0, M, r, max_iter=2000, tol=1e-15):
    """Alternating projections between rank-``r`` matrices and ``span B0``.

    The interior point only pins down the exposed directions to roughly the
    square root of its final gap.  Starting from its iterate, this converges
    (linearly) to a nearby rank-``r`` matrix that satisfies the linear
    constraints exactly, whose kernel is then accurate to roundoff.
    Returns the coefficients over ``B0`` and an orthonormal kernel basis.
    """
    d = M.shape[0]
    c = np.tensordot(B0, M, axes=([1, 2], [0, 1]))
    prev = np.inf
    for it in range(max_iter):
        M = np.tensordot(c, B0, axes=1)
        w, V = np.linalg.eigh(0.5 * (M + M.T))
        order = np.argsort(-np.abs(w))
        top, rest = order[:r], order[r:]
        Mr = (V[:, top] * w[top]) @ V[:, top].T
        leak = np.linalg.norm(w[rest]) / max(np.linalg.norm(w), 1e-300)
        if leak < tol or leak > 0.999 * prev:
            break
        prev = leak
        c = np.tensordot(B0, Mr, axes=([1, 2], [0, 1]))
    log.debug("rank-%d lift: leakage %.2e after %d sweeps", r, leak, it)
    U = V[:, np.sort(rest)] if r < d else np.zeros((d, 0))
    return c, U, leak


def _face_from_kernel(B0, U, face_tol):
    """Orthonormal coefficient rows ``T`` with ``(T @ B0) U = 0``."""
    if U.shape[1] == 0:
        return np.eye(B0.shape[0])
    P = np.einsum("jab,bk->jak", B0, U).reshape(B0.shape[0], -1).T
    _, sv, vt = np.linalg.svd(P, full_matrices=True)
    smax = sv[0] if len(sv) else 0.0
    rank = int(np.sum(sv > face_tol * max(smax, 1.0)))
    if rank < len(sv):
        log.debug("face restriction: last kept %.2e, first dropped %.2e", sv[rank - 1] if rank else np.inf, sv[rank])
    return vt[rank:]


def _facial_reduction(A, gap_tol, gamma_tol, face_tol, max_iter, max_reductions, t, expose_ratio=1e3):
    """Max-rank psd combination of the matrices ``A``.

    Returns ``(coeff, U, reductions, gamma)`` where ``coeff`` weighs the rows of
    ``A`` (``None`` when only the zero matrix is psd) and the columns of ``U``
    span the kernel of the combination.
    """
    d = A.shape[1]
    B0, Q0 = _frobenius_basis(A, 1e-12)  # B0_j = sum_k Q0_jk A_k
    T = np.eye(B0.shape[0])  # current face: B = T @ B0
    U = np.zeros((d, 0))
    W = np.eye(d)
    reductions = 0
    while True:
        if T.shape[0] == 0 or W.shape[1] == 0:
            return None, np.eye(d), reductions, 0.0
        B = np.tensordot(T, B0, axes=1)
        Bred = np.einsum("ai,jab,bk->jik", W, B, W, optimize=True)
        # on a restricted face the restriction error lives in exactly the
        # directions a congruence would amplify, so rescale only the first round
        out = _scaled_max_min_eig(Bred, gap_tol, gamma_tol, max_iter, rounds=2 if reductions == 0 else 0)
        if out is None:
            # no psd point with positive trace survives on this face
            return None, np.eye(d), reductions, 0.0
        gamma, mu, Mred, res, Mscaled = out
        if res.status != "optimal":
            log.debug("interior point stopped with status %s after %d iterations", res.status, res.iterations)
            if res.status == "numerical" and abs(res.primal - res.dual) > 1e-6:
                raise SDPFailure(
                    f"interior point failed (t={t}, face dim {W.shape[1]}, gap {res.primal - res.dual:.2e})"
                )
        log.debug("face dim %d: gamma %.3e, status %s", W.shape[1], gamma, res.status)
        if gamma > gamma_tol:
            break
        # pair the i-th largest X eigenvalue with the i-th smallest M eigenvalue;
        # directions where neither side dominates belong to a deeper face and
        # are left for the next round
        wx = np.linalg.eigvalsh(0.5 * (res.X + res.X.T))[::-1]
        wm = np.linalg.eigvalsh(0.5 * (Mscaled + Mscaled.T))
        mfloor = np.maximum(wm, 1e-300)
        k = int(np.sum(wx > expose_ratio * mfloor))
        if k == 0:
            k = int(np.sum(wx > mfloor))
        if k == 0:
            log.warning("gamma=%.2e but no exposing direction; accepting current face", gamma)
            break
        reductions += 1
        if reductions > max_reductions:
            raise SDPFailure("facial reduction did not terminate")
        log.debug("exposing %d directions", k)
        if W.shape[1] == k:
            return None, np.eye(d), reductions, 0.0
        _, U, leak = _lift_to_rank(B0, W @ Mred @ W.T, W.shape[1] - k)
        W = sla.null_space(U.T)
        # U is now as accurate as the lift; anything well above that is not null
        T = _face_from_kernel(B0, U, min(face_tol, max(100.0 * leak, 1e-13)))
    M = W @ Mred @ W.T
    if U.shape[1] == 0:
        return mu @ T @ Q0, U, reductions, gamma
    c, U, _ = _lift_to_rank(B0, M, W.shape[1])
    return c @ Q0, U, reductions, gamma


def generic_element(prob, tol=None, gap_tol=1e-10, gamma_tol=1e-6, face_tol=1e-7, max_iter=200, max_reductions=50):
    """Relative-interior point of ``K_{t,psd}`` and the kernel ``N_t`` of its moment matrix."""
    n, t, s0 = prob.n, prob.t, prob.moment_order
    d = n_monomials(n, s0)
    Z = np.atleast_2d(prob.kernel_basis)
    if Z.shape[0] == 0:
        raise ValueError("empty kernel basis")
    A = moment_matrices(Z, n, s0)
    coeff, U, reductions, gamma = _facial_reduction(A, gap_tol, gamma_tol, face_tol, max_iter, max_reductions, t)
    if coeff is None:
        L = LinearFunctional.zero(n, t)
        Mstar = np.zeros((d, d))
        U = np.eye(d)
        gamma = 0.0
    else:
        L = LinearFunctional(n, t, coeff @ Z)
        Mstar = moment_matrices(L.values, n, s0)[0]
        scale = np.trace(Mstar)
        if scale > 0:
            L = LinearFunctional(n, t, L.values / scale)
            Mstar = Mstar / scale
    kernel_polys = []
    for col in U.T:
        p = Polynomial.from_vector(col, n, drop_tol=1e-12)
        kernel_polys.append(p.normalized())
    spectrum = np.linalg.eigvalsh(Mstar)[::-1] if d else np.zeros(0)
    sol = GenericSolution(
        functional=L,
        moment_matrix=Mstar,
        rank_profile=[],
        kernel_basis=U.T.copy(),
        kernel_polys=kernel_polys,
        face_reductions=reductions,
        min_eigenvalue=gamma,
        spectrum=spectrum,
    )
    sol.rank_profile = rank_profile(sol, tol)
    r = d - U.shape[1]
    if 0 < r < d:
        sol.ambiguous_gap = bool(spectrum[r] > 0 and spectrum[r - 1] / max(abs(spectrum[r]), 1e-300) < 10)
    return sol


def rank_profile(sol, tol=None, method="spectral"):
    """``rank M_s(L*)`` for ``s = 0..floor(t/2)``.

    ``method="spectral"`` (default) counts singular values of each leading
    block above ``tol`` (default ``MOMENT_RANK_TOL``) times ``||M_top||_2``.

    ``method="kernel"`` reads the ranks off the face found by facial
    reduction: for a psd moment matrix ``ker M_s = ker M_top ∩ R[x]_s``, so
    ``rank M_s = |T_s| - dim(N ∩ R[x]_s)``.  The kernel basis ``N`` is exact to
    roundoff after the rank lift, and the intersection is read from the
    singular values of its trailing rows, which are in ``[0, 1]`` because
    ``N`` is orthonormal (threshold ``KERNEL_TAIL_TOL``).

    When the interior point stalls on a face of singularity degree above one,
    facial reduction stops early and ``N`` misses directions whose
    eigenvalues sit at the interior point's accuracy; the spectral count
    treats those as zero, which is why it is the default.
    """
    n = sol.functional.n
    s0 = sol.functional.order // 2
    M = sol.moment_matrix
    if not np.any(M):
        return [0] * (s0 + 1)
    out = []
    if method == "kernel":
        N = np.asarray(sol.kernel_basis).T
        for s in range(s0 + 1):
            k = n_monomials(n, s)
            tail = N[k:, :]
            if N.shape[1] == 0:
                inter = 0
            elif tail.shape[0] == 0:
                inter = N.shape[1]
            else:
                inter = N.shape[1] - int(np.sum(np.linalg.svd(tail, compute_uv=False) > KERNEL_TAIL_TOL))
            out.append(k - inter)
        return out
    if method != "spectral":
        raise ValueError(f"unknown method {method!r}")
    tol = MOMENT_RANK_TOL if tol is None else numla._as_tol(tol)
    smax = float(np.linalg.norm(M, 2))
    for s in range(s0 + 1):
        k = n_monomials(n, s)
        sv = np.linalg.svd(M[:k, :k], compute_uv=False)
        out.append(int(np.sum(sv > tol.threshold(smax, M.shape))))
    return out
