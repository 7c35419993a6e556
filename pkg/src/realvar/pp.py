"""Prolongation-projection driver.

For each order ``t`` the driver builds ``G_t`` (the prolonged generators, plus
in real mode the products ``x^a g`` of the kernel polynomials ``g`` of a generic
positive moment matrix), tabulates ``dim pi_s`` of the kernels of ``G_t`` and
``G_t+``, and stops when

    dim pi_s(G_t^perp) = dim pi_{s-1}(G_t^perp) = dim pi_s((G_t+)^perp).

The moment-matrix rank test ``rank M_s(L*) = rank M_{s-1}(L*)`` is available
as an alternative (or parallel) stopping rule.
"""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from realvar import extract, numla, quotient, sdp
from realvar.moment import PLUS_RULES, assemble_G, moment_matrix
from realvar.polycore import n_monomials

log = logging.getLogger(__name__)

__all__ = [
    "EMPTY",
    "DIMS",
    "STRONG",
    "RANK",
    "NOT_YET",
    "DimensionTable",
    "StopVerdict",
    "SolveConfig",
    "Iteration",
    "SolveResult",
    "projection_dimension",
    "projection_dimensions",
    "dimension_table",
    "check_stop",
    "rank_criterion",
    "solve",
]

EMPTY = "Empty"
DIMS = "DimConditions"
STRONG = "StrongDimConditions"
RANK = "RankCondition"
NOT_YET = "NotYet"

POLICIES = ("extended", "strict")
CRITERIA = ("dims", "rank", "both")
MODES = ("real", "complex")


@dataclass
class DimensionTable:
    """``dims_G[s] = dim pi_s(G_t^perp)`` for ``s <= t`` and ``dims_Gplus`` for ``s <= t+1``."""

    t: int
    dims_G: list
    dims_Gplus: list

    def violations(self):
        out = []
        for name, seq in (("G", self.dims_G), ("G+", self.dims_Gplus)):
            if any(b < a for a, b in zip(seq, seq[1:])):
                out.append(f"{name} row is not non-decreasing")
        if any(p > g for p, g in zip(self.dims_Gplus, self.dims_G)):
            out.append("G+ row exceeds G row")
        if self.dims_G and self.dims_G[0] not in (0, 1):
            out.append("dims_G[0] not in {0, 1}")
        return out

    def to_json(self):
        return {"t": self.t, "dims_G": list(self.dims_G), "dims_Gplus": list(self.dims_Gplus)}


@dataclass
class StopVerdict:
    kind: str
    t: int
    s: int = None
    s_below_D: bool = False
    candidates: list = field(default_factory=list)
    strong: list = field(default_factory=list)

    @property
    def stopped(self):
        return self.kind != NOT_YET

    def to_json(self):
        return {
            "kind": self.kind,
            "t": self.t,
            "s": self.s,
            "s_below_D": self.s_below_D,
            "candidates": list(self.candidates),
            "strong": list(self.strong),
        }


def projection_dimensions(kernel_rows, n, s_max, tol=None):
    """``rank`` of the kernel rows truncated to ``T^n_s`` for ``s = 0..s_max``.

    One absolute threshold, taken from the full (orthonormal) kernel matrix, is
    used for every ``s`` so the sequence is monotone by interlacing.
    """
    K = np.atleast_2d(np.asarray(kernel_rows, dtype=float))
    if K.shape[0] == 0 or not np.any(K):
        return [0] * (s_max + 1)
    tol = numla._as_tol(tol)
    thr = tol.threshold(float(np.linalg.norm(K, 2)), K.shape)
    out = []
    for s in range(s_max + 1):
        sv = numla._svd(K[:, : n_monomials(n, s)], compute_uv=False)
        out.append(int(np.sum(sv > thr)))
    return out


def projection_dimension(kernel_rows, n, s, tol=None):
    return projection_dimensions(kernel_rows, n, s, tol)[s]


def dimension_table(gt, tol=None):
    dims = projection_dimensions(gt.kernel, gt.n, gt.t, tol)
    plus = projection_dimensions(gt.kernel_plus, gt.n, gt.t + 1, tol)
    table = DimensionTable(gt.t, dims, plus)
    for v in table.violations():
        log.warning("t=%d: %s", gt.t, v)
    return table


def _s_range(t, D, policy, top):
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if policy == "strict":
        return range(max(D, 1), t // 2 + 1)
    return range(1, top + 1)


def check_stop(table, D, policy="extended"):
    """First ``s`` satisfying the dimension conditions, or ``Empty`` / ``NotYet``."""
    t, g, gp = table.t, table.dims_G, table.dims_Gplus
    zeros = [s for s, d in enumerate(g) if d == 0]
    if zeros:
        return StopVerdict(EMPTY, t, zeros[0], False)
    rng = _s_range(t, D, policy, t)
    cands = [s for s in rng if g[s] == g[s - 1] == gp[s]]
    strong = [s for s in rng if 2 * s <= t and g[2 * s] == g[s - 1] == gp[2 * s]]
    if not cands:
        return StopVerdict(NOT_YET, t, None, False, [], strong)
    s = cands[0]
    kind = STRONG if s in strong else DIMS
    return StopVerdict(kind, t, s, s < D, cands, strong)


def rank_criterion(profile, t, D, policy="extended"):
    """First ``s`` with ``rank M_s(L*) = rank M_{s-1}(L*)``.

    ``profile`` is the rank list of a generic solution (or the solution itself).
    """
    if isinstance(profile, sdp.GenericSolution):
        profile = profile.rank_profile
    profile = list(profile)
    if profile and profile[0] == 0:
        return StopVerdict(EMPTY, t, 0, False)
    rng = _s_range(t, D, policy, len(profile) - 1)
    cands = [s for s in rng if s < len(profile) and profile[s] == profile[s - 1]]
    if not cands:
        return StopVerdict(NOT_YET, t)
    return StopVerdict(RANK, t, cands[0], cands[0] < D, cands)


@dataclass
class SolveConfig:
    """Solver options.

    ``t_max`` defaults to ``D + 4``.  ``rank_tol`` governs the ``G_t`` kernels
    (a float is a relative tolerance).  ``proj_tol`` governs the projected
    dimensions and the basis selection; it defaults to ``rank_tol`` in complex
    mode and to ``sdp.MOMENT_RANK_TOL`` in real mode, where the rows of ``S_t``
    carry the accuracy of the moment matrix.  ``t_extra`` keeps going for that many
    orders after the first successful extraction and keeps the attempt with the
    smallest residual.
    """

    mode: str = "real"
    criterion: str = "dims"
    policy: str = "extended"
    t_start: int = None
    t_max: int = None
    rank_tol: object = None
    proj_tol: object = None
    imag_tol: float = extract.DEFAULT_IMAG_TOL
    residual_tol: float = extract.DEFAULT_RESIDUAL_TOL
    comm_tol: float = 1e-4
    seed: int = 0
    basis: str = "greedy"
    plus_rule: str = "prolonged"
    t_extra: int = 0
    refine: bool = True
    output: str = "table"

    def validate(self, D):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.criterion not in CRITERIA:
            raise ValueError(f"unknown criterion {self.criterion!r}")
        if self.mode == "complex" and self.criterion != "dims":
            raise ValueError("the rank criterion needs real mode")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.basis not in ("greedy", "pivots"):
            raise ValueError(f"unknown basis selector {self.basis!r}")
        if self.plus_rule not in PLUS_RULES:
            raise ValueError(f"unknown plus rule {self.plus_rule!r}")
        t_start = D if self.t_start is None else self.t_start
        t_max = D + 4 if self.t_max is None else self.t_max
        if t_start < D:
            raise ValueError(f"t_start={t_start} is below D={D}")
        if t_max < t_start:
            raise ValueError(f"t_max={t_max} is below t_start={t_start}")
        return t_start, t_max


@dataclass
class Extraction:
    """One extraction attempt at a stopping order."""

    t: int
    s: int
    source: str
    ok: bool
    message: str = ""
    basis: object = None
    border: object = None
    multiplication: object = None
    roots: list = field(default_factory=list)
    rejected: list = field(default_factory=list)

    @property
    def max_residual(self):
        return max((r.residual for r in self.roots), default=0.0)


@dataclass
class Iteration:
    t: int
    table: DimensionTable
    verdict: StopVerdict
    rank_profile: list = None
    rank_verdict: StopVerdict = None
    face_reductions: int = 0
    kernel_size: int = 0
    seconds: float = 0.0
    extraction: Extraction = None
    solution: object = field(default=None, repr=False)


@dataclass
class SolveResult:
    status: str
    config: SolveConfig
    iterations: list
    verdict: StopVerdict = None
    extraction: Extraction = None
    radical_certified: bool = False
    first_dims: tuple = None
    first_rank: tuple = None
    message: str = ""

    @property
    def roots(self):
        return self.extraction.roots if self.extraction else []

    @property
    def rejected(self):
        return self.extraction.rejected if self.extraction else []

    @property
    def t(self):
        return self.verdict.t if self.verdict else None

    @property
    def s(self):
        return self.verdict.s if self.verdict else None

    @property
    def tables(self):
        return [it.table for it in self.iterations]


def _extract(sys, cfg, t, s, Y, tol, source, s_below_D):
    n = sys.n
    ex = Extraction(t, s, source, False)
    try:
        select = quotient.select_basis_greedy if cfg.basis == "greedy" else quotient.select_basis_pivots
        qb = select(Y, n, s, tol)
        ex.basis = qb
        bb = quotient.border_basis(qb, tol)
        ex.border = bb
        ms = quotient.multiplication_matrices(qb, bb)
        ex.multiplication = ms
        scale = max(1.0, max(np.abs(X).max(initial=0.0) for X in ms.matrices))
        if ms.commutativity_error > cfg.comm_tol * scale:
            ex.message = f"multiplication matrices do not commute: c(X) = {ms.commutativity_error:.3g}"
            return ex
        cands = extract.extract_roots(ms, qb, cfg.seed, sys, imag_tol=cfg.imag_tol, residual_tol=cfg.residual_tol)
    except (quotient.QuotientError, extract.ExtractionError, numla.LinAlgFailure) as exc:
        ex.message = str(exc)
        return ex
    check = cfg.mode == "complex" and s_below_D
    ex.roots, ex.rejected = extract.verify_roots(
        cands, sys, cfg.mode, cfg.imag_tol, cfg.residual_tol, refine=cfg.refine, check_residual=check
    )
    if cfg.mode == "real" and s_below_D and ex.rejected:
        log.info("t=%d s=%d: %d candidate(s) failed verification", t, s, len(ex.rejected))
    ex.ok = True
    return ex


def solve(sys, config=None):
    """Run the order loop until a stopping rule fires and extraction succeeds."""
    cfg = config or SolveConfig()
    t_start, t_max = cfg.validate(sys.D)
    tol = numla._as_tol(cfg.rank_tol) if cfg.rank_tol is not None else numla.RankTolerance.from_env()
    if cfg.proj_tol is not None:
        ptol = numla._as_tol(cfg.proj_tol)
    else:
        ptol = sdp.MOMENT_RANK_TOL if cfg.mode == "real" else tol
    n, D = sys.n, sys.D
    iters = []
    best = None
    best_verdict = None
    first_dims = first_rank = None
    stop_after = t_max
    need_rank = cfg.mode == "real" and cfg.criterion in ("rank", "both")

    for t in range(t_start, t_max + 1):
        t0 = time.perf_counter()
        sol = None
        if cfg.mode == "real":
            sol = sdp.generic_element(sdp.build_cone_problem(sys, t, tol))
            gt = assemble_G(sys, t, sol.kernel_basis, "real", tol, cfg.plus_rule)
        else:
            gt = assemble_G(sys, t, mode="complex", tol=tol, plus_rule=cfg.plus_rule)
        table = dimension_table(gt, ptol)
        verdict = check_stop(table, D, cfg.policy)
        it = Iteration(t, table, verdict)
        if sol is not None:
            it.solution = sol
            it.rank_profile = list(sol.rank_profile)
            it.face_reductions = sol.face_reductions
            it.kernel_size = len(sol.kernel_polys)
            if need_rank:
                it.rank_verdict = rank_criterion(sol, t, D, cfg.policy)
        iters.append(it)
        log.info("t=%d dims_G=%s dims_G+=%s verdict=%s s=%s rank=%s", t, table.dims_G, table.dims_Gplus,
                 verdict.kind, verdict.s, it.rank_profile)

        if verdict.kind == EMPTY or (it.rank_verdict is not None and it.rank_verdict.kind == EMPTY):
            it.seconds = time.perf_counter() - t0
            v = verdict if verdict.kind == EMPTY else it.rank_verdict
            return SolveResult("empty", cfg, iters, v, None, False, (t, v.s), first_rank,
                               "no real points" if cfg.mode == "real" else "no points")

        if verdict.stopped and first_dims is None:
            first_dims = (t, verdict.s)
        if it.rank_verdict is not None and it.rank_verdict.stopped and first_rank is None:
            first_rank = (t, it.rank_verdict.s)

        trigger = None
        if cfg.criterion in ("dims", "both") and verdict.stopped:
            trigger = verdict
        elif cfg.criterion == "rank" and it.rank_verdict is not None and it.rank_verdict.stopped:
            trigger = it.rank_verdict
        if trigger is not None and t <= stop_after:
            s = trigger.s
            if trigger.kind == RANK:
                Y = moment_matrix(sol.functional, s)
                ex = _extract(sys, cfg, t, s, Y, sdp.MOMENT_RANK_TOL, "rank", trigger.s_below_D)
            else:
                Y = quotient.evaluation_matrix(gt.kernel, n, s, ptol)
                ex = _extract(sys, cfg, t, s, Y, ptol, "dims", trigger.s_below_D)
            it.extraction = ex
            if ex.ok:
                log.info("t=%d s=%d: %d root(s), %d rejected", t, s, len(ex.roots), len(ex.rejected))
                if best is None or ex.max_residual < best.max_residual:
                    best, best_verdict = ex, trigger
                stop_after = min(stop_after, t + cfg.t_extra)
            else:
                log.info("t=%d s=%d: extraction failed: %s", t, s, ex.message)
        it.seconds = time.perf_counter() - t0

        done = best is not None and t >= stop_after
        if done and cfg.criterion == "both" and first_rank is None:
            done = False
        if done:
            break

    if best is None:
        return SolveResult("incomplete", cfg, iters, None, None, False, first_dims, first_rank,
                           f"no successful extraction up to t_max={t_max}")
    certified = False
    if cfg.mode == "real":
        tab = next(i.table for i in iters if i.t == best.t)
        certified = len(best.roots) == tab.dims_G[best.s]
    return SolveResult("solved", cfg, iters, best_verdict, best, certified, first_dims, first_rank)
