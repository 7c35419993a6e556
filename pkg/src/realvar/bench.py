"""Acceptance checks on the embedded corpus.

Each check returns an :class:`Outcome`; ``realvar bench`` and the acceptance
tests print one line per check.  Reference tables are stored here verbatim;
``None`` marks a cell that is not compared.
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from realvar import corpus, pp, report
from realvar.polycore import Polynomial, PolySystem, is_connected_to_1, is_division_closed, n_monomials

__all__ = ["Outcome", "CRITERIA", "run", "random_product_system", "match_roots"]


@dataclass
class Outcome:
    name: str
    passed: bool
    details: list = field(default_factory=list)
    seconds: float = 0.0

    def line(self):
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.name} ({self.seconds:.1f}s)"
        return head + ("" if not self.details else ": " + "; ".join(self.details))


class _Check:
    def __init__(self, name):
        self.name = name
        self.ok = True
        self.details = []

    def expect(self, cond, msg):
        cond = bool(cond)
        self.ok &= cond
        self.details.append(("ok " if cond else "FAILED ") + msg)
        return cond


# Reference dimension rows, (t -> (G row, G+ row)); complex rows have no G+ entry.
COX98_REAL = {
    3: ([1, 4, 8, 11], [1, 4, 8, 10, 12]),
    4: ([1, 4, 8, 10, 12], [1, 4, 8, 9, 10, 12]),
    5: ([1, 2, 2, 2, 3, 5], [1, 2, 2, 2, 3, 4, 6]),
    6: ([1, 2, 2, 2, 2, 2, 3], [1, 2, 2, 2, 2, 2, 2, 3]),
}
COX98_COMPLEX = {
    3: [1, 4, 8, 11],
    4: [1, 4, 8, 10, 12],
    5: [1, 4, 8, 9, 10, 12],
    6: [1, 4, 8, 8, 9, 10, 12],
    7: [1, 4, 8, 8, 8, 9, 10, 12],
}
COX98_RANKS = {3: [1, 4], 4: [1, 4, 8], 5: [1, 2, 8], 6: [1, 2, 2, 10]}
COX98_ROOTS = [(-1.101, -2.878, -2.821), (0.966, -2.813, 3.072)]
COX98_COMPLEX_ROOTS = [
    (-1.10, -2.88, -2.82),
    (0.0767 + 2.243j, 0.461 + 0.497j, 0.0764 + 0.00834j),
    (0.0767 - 2.243j, 0.461 - 0.497j, 0.0764 - 0.00834j),
    (-0.0815 - 0.931j, 2.35 + 0.0431j, -0.274 + 2.209j),
    (-0.0815 + 0.931j, 2.35 - 0.0431j, -0.274 - 2.20j),
    (0.0725 + 2.24j, -0.466 - 0.464j, 0.0724 + 0.00210j),
    (0.0725 - 2.24j, -0.466 + 0.464j, 0.0724 - 0.00210j),
    (0.966, -2.81, 3.07),
]
COX3_REAL = {
    5: ([1, 3, 5, 6, 8, 10], [1, 3, 5, 6, 6, 8, 10]),
    6: ([1, 2, 2, 2, 2, 2, 4], [1, 2, 2, 2, 2, 2, 2, 4]),
}
COX3_RANKS = {5: [1, 3, 5], 6: [1, 2, 2, 4]}
GAUSS_REAL = {
    4: ([1, 3, 7, 11, 20], [1, 3, 4, 8, 12, 23]),
    5: ([1, 2, 2, None, None, None], [1, 2, 2, None, None, None, None]),
}
GAUSS_RANKS = {4: [1, 4, 9], 5: [1, 2, 5]}
GAUSS_ROOTS = [(1, 1, -0.57735, 0.57735), (1, 1, 0.57735, -0.57735)]
KATSURA5_REAL = {
    2: ([1, 6, 16], [1, 6, 16, 26]),
    3: ([1, 6, 16, 26], [1, 6, 16, 26, 31]),
    4: ([1, 6, 16, 26, 31], [1, 6, 16, 26, 31, 32]),
    5: ([1, 6, 16, 26, 31, 32], [1, 6, 16, 26, 31, 32, 32]),
    6: ([1, 6, 12, 12, 12, 12, 12], [1, 6, 12, 12, 12, 12, 12, 12]),
}


def _row_matches(got, want):
    return len(got) == len(want) and all(w is None or g == w for g, w in zip(got, want))


def _compare_tables(chk, label, result, reference):
    tables = {it.t: it.table for it in result.iterations}
    for t, want in sorted(reference.items()):
        if t not in tables:
            chk.expect(False, f"{label} t={t} not computed")
            continue
        tab = tables[t]
        if isinstance(want, tuple):
            ok = _row_matches(tab.dims_G, want[0]) and _row_matches(tab.dims_Gplus, want[1])
            chk.expect(ok, f"{label} t={t} rows {tab.dims_G} / {tab.dims_Gplus}")
        else:
            chk.expect(_row_matches(tab.dims_G, want), f"{label} t={t} row {tab.dims_G}")


def match_roots(found, expected):
    """Optimal one-to-one matching; returns the worst per-coordinate distance."""
    if len(found) != len(expected):
        return np.inf
    if len(found) == 0:
        return 0.0
    F = np.asarray(found, dtype=complex).reshape(len(found), -1)
    E = np.asarray(expected, dtype=complex).reshape(len(expected), -1)
    cost = np.abs(F[:, None, :] - E[None, :, :]).max(axis=2)
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def _roots(result):
    return [r.coordinates for r in result.roots]


def _solve(name, **kw):
    return pp.solve(corpus.load(name), pp.SolveConfig(**kw))


def check_cox98_real():
    chk = _Check("1 cox98 real")
    res = _solve("cox98")
    v = res.verdict
    chk.expect(v is not None and (v.t, v.s) == (5, 2), f"verdict {None if v is None else (v.t, v.s)}")
    top = _solve("cox98", plus_rule="top", t_max=5)
    _compare_tables(chk, "table", top, {t: COX98_REAL[t] for t in (3, 4, 5)})
    err = match_roots(_roots(res), COX98_ROOTS)
    chk.expect(err <= 1e-3, f"2 roots, max error {err:.1e}")
    eps = max((r.residual for r in res.roots), default=np.inf)
    chk.expect(eps <= 1e-4, f"max eps {eps:.1e}")
    chk.expect(res.radical_certified, "radical certified")
    return chk


def check_cox98_complex():
    chk = _Check("2 cox98 complex")
    res = _solve("cox98", mode="complex", t_extra=1)
    v = res.verdict
    first = next((it for it in res.iterations if it.verdict.stopped), None)
    chk.expect(first is not None and (first.t, first.verdict.s) == (6, 3),
               f"verdict {None if first is None else (first.t, first.verdict.s)}")
    _compare_tables(chk, "table", res, COX98_COMPLEX)
    err = match_roots(_roots(res), COX98_COMPLEX_ROOTS)
    chk.expect(err <= 1e-2, f"{len(res.roots)} roots, max error {err:.1e}")
    return chk


def check_cox98_rank():
    chk = _Check("3 cox98 rank criterion")
    res = _solve("cox98", criterion="both")
    chk.expect(res.first_rank == (6, 2), f"rank criterion first at {res.first_rank}")
    prof = next((it.rank_profile for it in res.iterations if it.t == 6), None)
    chk.expect(prof is not None and prof[:3] == [1, 2, 2], f"t=6 profile {prof}")
    chk.expect(res.first_dims is not None and res.first_dims[0] == 5 < res.first_rank[0],
               f"dims criterion first at {res.first_dims}")
    return chk


def check_cox3():
    chk = _Check("4 cox3 real")
    res = _solve("cox3")
    v = res.verdict
    chk.expect(v is not None and v.kind == pp.STRONG and (v.t, v.s) == (6, 2),
               f"verdict {None if v is None else (v.kind, v.t, v.s)}")
    top = _solve("cox3", plus_rule="top", t_max=6)
    _compare_tables(chk, "table", top, COX3_REAL)
    err = match_roots([np.real(z) for z in _roots(res)], [(0, 0), (1, 2)])
    chk.expect(err <= 2e-2, f"{len(res.roots)} roots, max error {err:.1e}")
    profs = {it.t: it.rank_profile for it in res.iterations}
    chk.expect(profs.get(6, [])[:3] == [1, 2, 2], f"t=6 profile {profs.get(6)}")
    return chk


def check_gauss():
    chk = _Check("5 gauss real")
    res = _solve("gauss", criterion="both")
    v = res.verdict
    chk.expect(v is not None and (v.t, v.s) == (5, 2), f"verdict {None if v is None else (v.t, v.s)}")
    top = _solve("gauss", plus_rule="top", t_max=5)
    _compare_tables(chk, "table", top, GAUSS_REAL)
    err = match_roots(_roots(res), GAUSS_ROOTS)
    chk.expect(err <= 1e-3, f"{len(res.roots)} roots, max error {err:.1e}")
    chk.expect(res.first_rank is not None and res.first_rank[0] == 6, f"rank criterion first at {res.first_rank}")
    return chk


def check_katsura5():
    chk = _Check("6 katsura5 real")
    res = _solve("katsura5", plus_rule="top")
    v = res.verdict
    chk.expect(v is not None and (v.t, v.s) == (6, 3), f"verdict {None if v is None else (v.t, v.s)}")
    _compare_tables(chk, "table", res, KATSURA5_REAL)
    chk.expect(len(res.roots) == 12, f"{len(res.roots)} verified real roots")
    eps = max((r.residual for r in res.roots), default=np.inf)
    chk.expect(eps <= 1e-2, f"max eps {eps:.1e}")
    c = res.extraction.multiplication.commutativity_error if res.extraction else np.inf
    chk.expect(c <= 1e-4, f"c(X) {c:.1e}")
    return chk


def check_positive_dimensional():
    chk = _Check("7 cox98 positive-dimensional variant")
    res = _solve("cox98pd", t_max=8)
    v = res.verdict
    chk.expect(v is not None and (v.t, v.s) == (7, 2), f"verdict {None if v is None else (v.t, v.s)}")
    err = match_roots(_roots(res), COX98_ROOTS)
    chk.expect(err <= 1e-3, f"{len(res.roots)} roots, max error {err:.1e}")
    return chk


PROPERTY_SYSTEMS = ("nongorenstein", "sumsquares", "cox98", "cox3", "gauss", "katsura5")
# orders computed past the first success, to exercise more (t, s) pairs
PROPERTY_EXTRA = {"nongorenstein": 3, "sumsquares": 3, "cox98": 2, "cox3": 2, "gauss": 2, "katsura5": 0}


def strong_holds(table, s):
    t, g, gp = table.t, table.dims_G, table.dims_Gplus
    return 2 * s <= t and g[s - 1] == g[2 * s] == gp[2 * s]


def dims_hold(table, s):
    g, gp = table.dims_G, table.dims_Gplus
    return g[s] == g[s - 1] == gp[s]


def psdker_defect(sol):
    """Worst violation of the psd kernel law on ``M = M_top(L*)``.

    For psd ``M`` and ``p`` a degree-``s`` vector padded with zeros,
    ``||M p||^2 <= ||M|| p'Mp = ||M|| v'M_s v``, which is what places
    ``ker M_s`` inside ``ker M``; an indefinite ``M`` breaks it.  Roundoff
    leaves ``lambda_min(M) = -delta`` slightly negative, so the bound is applied
    to ``M + delta I``: ``||M p|| <= sqrt((||M|| + delta)(v'M_s v + delta)) + delta``.
    Returns the largest ratio of the two sides over the numerical kernel of
    every leading block (at most 1 when the law holds) and ``lambda_min / ||M||``.
    """
    from realvar.sdp import MOMENT_RANK_TOL

    n = sol.functional.n
    M = sol.moment_matrix
    norm = float(np.linalg.norm(M, 2))
    if norm == 0:
        return 0.0, 0.0
    lam_min = float(np.linalg.eigvalsh(M)[0])
    delta = max(0.0, -lam_min)  # M + delta I is psd
    worst = 0.0
    for s in range(len(sol.rank_profile)):
        ds = n_monomials(n, s)
        w, V = np.linalg.eigh(M[:ds, :ds])
        thr = MOMENT_RANK_TOL.threshold(norm, M.shape)
        for v in V[:, np.abs(w) <= thr].T:
            p = np.zeros(M.shape[0])
            p[:ds] = v
            q = max(float(v @ M[:ds, :ds] @ v) + delta, 1e-15 * norm)
            bound = np.sqrt((norm + delta) * q) + delta
            worst = max(worst, float(np.linalg.norm(M @ p)) / bound)
    return worst, lam_min / norm


def kernel_vanishing(sol, roots):
    worst = 0.0
    for g in sol.kernel_polys:
        norm = np.linalg.norm(list(g.terms.values()))
        for v in roots:
            worst = max(worst, abs(g(np.real(v))) / norm)
    return worst


def check_properties():
    chk = _Check("8 property suite")
    pairs = 0
    psdker_worst = 0.0
    vanish_worst = 0.0
    for name in PROPERTY_SYSTEMS:
        sys_ = corpus.load(name)
        cfg = pp.SolveConfig(criterion="both", t_extra=PROPERTY_EXTRA[name], t_max=sys_.D + 6)
        res = pp.solve(sys_, cfg)
        for it in res.iterations:
            sol, tab, t = it.solution, it.table, it.t
            for s in range(max(sys_.D, 1), t // 2 + 1):
                flat = s < len(it.rank_profile) and it.rank_profile[s] == it.rank_profile[s - 1]
                strong = strong_holds(tab, s)
                pairs += 1
                if flat != strong or (strong and not dims_hold(tab, s)):
                    chk.expect(False, f"{name} t={t} s={s}: rank {flat}, strong {strong}")
            ratio, neg = psdker_defect(sol)
            psdker_worst = max(psdker_worst, ratio)
            # the interior point stops at a duality gap of 1e-10 on a trace-one M
            if ratio > 1.0 + 1e-6 or neg < -1e-10 * sol.moment_matrix.shape[0]:
                chk.expect(False, f"{name} t={t}: psd kernel law ratio {ratio:.3g}, min eig {neg:.1e}")
            if res.roots:
                w = kernel_vanishing(sol, [r.coordinates for r in res.roots])
                vanish_worst = max(vanish_worst, w)
                if w > 1e-5:
                    chk.expect(False, f"{name} t={t}: kernel polys reach {w:.1e} at the roots")
        ex = res.extraction
        if ex is not None:
            B = ex.basis.monomials
            chk.expect(is_division_closed(B) and is_connected_to_1(B), f"{name} B closed and connected")
        again = pp.solve(sys_, cfg)
        same = json.dumps(report.result_to_json(sys_, res)) == json.dumps(report.result_to_json(sys_, again))
        same &= all(a.coordinates == b.coordinates for a, b in zip(res.roots, again.roots))
        chk.expect(same, f"{name} rerun bit-identical")
    chk.details.insert(0, f"{pairs} (t, s) pairs with D <= s <= t/2, psd kernel ratio <= {psdker_worst:.3g}, "
                          f"kernel polys <= {vanish_worst:.1e} at the roots")
    return chk


def random_product_system(seed, n=None, max_roots=4):
    """System whose common zeros (real and complex) are a known set of rational points.

    For each coordinate the product of ``x_j - c`` over the values ``c`` taken
    by the points confines the zeros to a finite grid.  Products of one random
    rational hyperplane through every point are then added until each grid
    point outside the set is excluded by some product.  Every generator is a
    product of linear forms.  Odd seeds multiply the first generator by
    ``1 + x1^2``, which adds complex zeros only.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4)) if n is None else n
    k = int(rng.integers(1, max_roots + 1))
    pts = set()
    while len(pts) < k:
        pts.add(tuple(float(v) for v in rng.integers(-4, 5, size=n) / 2))
    pts = sorted(pts)
    P = np.array(pts)
    x = [Polynomial.variable(i, n) for i in range(n)]
    one = Polynomial.constant(1.0, n)

    def linear(a, p):
        return sum((x[i] * a[i] for i in range(n)), Polynomial.constant(-float(a @ p), n))

    gens = []
    for j in range(n):
        g = one
        for c in sorted(set(P[:, j])):
            g = g * (x[j] - c)
        gens.append(g)
    grid = np.array(np.meshgrid(*[sorted(set(P[:, j])) for j in range(n)], indexing="ij")).reshape(n, -1).T
    left = [q for q in grid if not any(np.array_equal(q, p) for p in P)]
    while left:
        g, forms = one, []
        for p in P:
            a = np.zeros(n)
            while not np.any(a):
                a = rng.integers(-3, 4, size=n).astype(float)
            forms.append(a)
            g = g * linear(a, p)
        gone = [q for q in left if all(a @ (q - p) != 0 for a, p in zip(forms, P))]
        if gone:
            gens.append(g)
            left = [q for q in left if not any(q is r for r in gone)]
    if seed % 2:
        gens[0] = gens[0] * (one + x[0] * x[0])
    return PolySystem(n, tuple(gens)), pts


def companion_real_roots(g, imag_tol=1e-8):
    deg = g.degree
    c = np.zeros(deg + 1)
    for m, v in g.terms.items():
        c[deg - m.degree] = v
    r = np.roots(c)
    return sorted(float(z.real) for z in r if abs(z.imag) <= imag_tol * max(1.0, abs(z)))


def check_oracle(count=25):
    chk = _Check("9 random product systems")
    fails = 0
    for seed in range(count):
        sys_, pts = random_product_system(seed)
        res = pp.solve(sys_, pp.SolveConfig(seed=seed))
        got = [tuple(np.real(c)) for c in _roots(res)]
        err = match_roots(got, pts)
        ok = res.status == "solved" and err <= 1e-6
        if sys_.n == 1:
            oracle = companion_real_roots(sys_.generators[0])
            ok &= match_roots([(v,) for v in oracle], pts) <= 1e-6
        if not ok:
            fails += 1
            chk.expect(False, f"seed {seed} n={sys_.n} {len(pts)} pts: {res.status}, {len(got)} roots, err {err:.1e}")
    chk.expect(fails == 0, f"{count - fails}/{count} recovered within 1e-6")
    return chk


def check_empty():
    chk = _Check("10 empty real variety")
    for name in ("noreal1", "noreal2"):
        sys_ = corpus.load(name)
        res = pp.solve(sys_, pp.SolveConfig())
        v = res.verdict
        chk.expect(res.status == "empty" and v.t <= sys_.D + 2, f"{name}: {res.status} at t={v.t if v else None}")
    return chk


CRITERIA = {
    "cox98": check_cox98_real,
    "cox98-complex": check_cox98_complex,
    "cox98-rank": check_cox98_rank,
    "cox3": check_cox3,
    "gauss": check_gauss,
    "katsura5": check_katsura5,
    "cox98pd": check_positive_dimensional,
    "properties": check_properties,
    "oracle": check_oracle,
    "empty": check_empty,
}


def run_one(name):
    t0 = time.perf_counter()
    try:
        chk = CRITERIA[name]()
        out = Outcome(chk.name, chk.ok, chk.details)
    except Exception as exc:  # report and continue with the next check
        out = Outcome(name, False, [f"{type(exc).__name__}: {exc}"])
    out.seconds = time.perf_counter() - t0
    return out


def run(names=None, stream=None):
    for name in names or CRITERIA:
        if name not in CRITERIA:
            raise KeyError(f"unknown check {name!r}; known: {', '.join(CRITERIA)}")
        out = run_one(name)
        if stream is not None:
            print(out.line(), file=stream, flush=True)
        yield out
