import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from realvar import corpus, pp, sdp
from realvar.bench import match_roots
from realvar.moment import assemble_G
from realvar.parse import parse_polynomial, parse_system
from realvar.pp import DimensionTable, check_stop, rank_criterion


def iteration(result, t):
    return next(it for it in result.iterations if it.t == t)


class TestDimensionTables:
    def test_cox98_complex_t3(self, solved):
        assert iteration(solved("cox98", mode="complex"), 3).table.dims_G[:4] == [1, 4, 8, 11]

    def test_cox3_real_t6(self, solved):
        # the last cell is printed gray in the published table and is not compared
        assert iteration(solved("cox3"), 6).table.dims_G[:6] == [1, 2, 2, 2, 2, 2]

    def test_gauss_real_t4(self, solved):
        assert iteration(solved("gauss"), 4).table.dims_G == [1, 3, 7, 11, 20]

    def test_cox98_projection_dimensions(self, solved):
        it = iteration(solved("cox98"), 5)
        assert it.table.dims_G[1:4] == [2, 2, 2]

    @pytest.mark.slow
    def test_katsura5_t6(self, solved):
        assert iteration(solved("katsura5"), 6).table.dims_G[2] == 12

    def test_zero_kernel(self):
        assert pp.projection_dimensions(np.zeros((0, 6)), 2, 2) == [0, 0, 0]
        assert pp.projection_dimension(np.zeros((2, 6)), 2, 1) == 0

    @pytest.mark.parametrize("name", ["cox98", "cox3", "gauss", "nongorenstein", "sumsquares"])
    def test_invariants(self, solved, name):
        for it in solved(name).iterations:
            assert it.table.violations() == []
            assert len(it.table.dims_G) == it.t + 1
            assert len(it.table.dims_Gplus) == it.t + 2

    def test_real_never_exceeds_complex(self, solved):
        real, cplx = solved("cox98"), solved("cox98", mode="complex")
        for it in real.iterations:
            other = iteration(cplx, it.t)
            assert all(a <= b for a, b in zip(it.table.dims_G, other.table.dims_G))


class TestCheckStop:
    def test_cox98_real(self, solved):
        v = solved("cox98").verdict
        assert (v.kind, v.t, v.s, v.s_below_D) == (pp.DIMS, 5, 2, True)

    def test_cox98_complex(self, solved):
        v = solved("cox98", mode="complex").verdict
        assert (v.t, v.s) == (6, 3)

    def test_cox3_strong(self, solved):
        v = solved("cox3").verdict
        assert (v.kind, v.t, v.s) == (pp.STRONG, 6, 2)

    def test_empty(self):
        v = check_stop(DimensionTable(2, [1, 0, 0], [0, 0, 0, 0]), 2)
        assert v.kind == pp.EMPTY

    def test_strict_policy_range(self):
        table = DimensionTable(4, [1, 2, 2, 2, 3], [1, 2, 2, 2, 2, 3])
        assert check_stop(table, 2, "extended").s == 2
        assert check_stop(table, 3, "strict").kind == pp.NOT_YET
        with pytest.raises(ValueError):
            check_stop(table, 2, "other")

    @settings(max_examples=300, deadline=None)
    @given(st.data())
    def test_verdict_properties(self, data):
        t = data.draw(st.integers(1, 7))
        D = data.draw(st.integers(1, t))
        steps = data.draw(st.lists(st.integers(0, 2), min_size=t + 1, max_size=t + 1))
        g = list(np.cumsum(steps))
        gp = [min(x, data.draw(st.integers(0, x))) for x in g] + [g[-1]]
        gp = list(np.minimum.accumulate(gp[::-1])[::-1])
        v = check_stop(DimensionTable(t, g, gp), D)
        assert (v.kind == pp.EMPTY) == (0 in g)
        if v.kind in (pp.DIMS, pp.STRONG):
            s = v.s
            assert g[s] == g[s - 1] == gp[s]
            assert s == min(v.candidates)
            assert v.s_below_D == (s < D)
        if v.kind == pp.STRONG:
            assert 2 * v.s <= t and g[2 * v.s] == g[v.s - 1] == gp[2 * v.s]


class TestRankCriterion:
    def test_cox98_t6(self, solved):
        v = iteration(solved("cox98", criterion="both"), 6).rank_verdict
        assert (v.kind, v.s) == (pp.RANK, 2)

    def test_gauss_t6(self, solved):
        v = iteration(solved("gauss", criterion="both"), 6).rank_verdict
        assert (v.kind, v.s) == (pp.RANK, 2)

    def test_growing_profile(self):
        assert rank_criterion([1, 4, 9], 4, 3).kind == pp.NOT_YET

    def test_flat_profile(self):
        v = rank_criterion([1, 2, 2], 4, 2)
        assert (v.kind, v.s, v.s_below_D) == (pp.RANK, 2, False)

    def test_zero_profile(self):
        assert rank_criterion([0, 0], 2, 2).kind == pp.EMPTY

    def test_proposition_42_direction(self):
        # (ZRa) holds for G_2 at s = 1 on x1^2, x2^2, x1*x2; rank M_1 = rank M_0 at order 2 + 2
        sys = parse_system("vars x1 x2; x1^2; x2^2; x1*x2;")
        sol2 = sdp.generic_element(sdp.build_cone_problem(sys, 2))
        table = pp.dimension_table(assemble_G(sys, 2, sol2.kernel_polys), sdp.MOMENT_RANK_TOL)
        assert table.dims_G[1] == table.dims_G[0]
        sol4 = sdp.generic_element(sdp.build_cone_problem(sys, 4))
        assert sol4.rank_profile[1] == sol4.rank_profile[0]


class TestSolve:
    def test_gauss(self, solved):
        res = solved("gauss")
        assert (res.t, res.s) == (5, 2)
        want = [(1, 1, -1 / np.sqrt(3), 1 / np.sqrt(3)), (1, 1, 1 / np.sqrt(3), -1 / np.sqrt(3))]
        assert match_roots([r.point for r in res.roots], want) < 1e-3

    def test_no_real_roots(self):
        res = pp.solve(corpus.load("noreal1"))
        assert res.status == "empty"
        assert res.verdict.kind == pp.EMPTY
        assert res.roots == []

    def test_linear(self):
        res = pp.solve(corpus.load("linear"))
        assert len(res.iterations) == 1
        assert [r.point[0] for r in res.roots] == [pytest.approx(1.0)]

    def test_radical_certificate(self, solved):
        res = solved("cox98")
        assert res.radical_certified
        assert len(res.roots) == iteration(res, res.t).table.dims_G[res.s] == 2

    def test_incomplete(self):
        res = pp.solve(corpus.load("cox98"), pp.SolveConfig(t_max=4))
        assert res.status == "incomplete"
        assert [it.t for it in res.iterations] == [3, 4]

    def test_strict_policy(self):
        res = pp.solve(corpus.load("cox98"), pp.SolveConfig(policy="strict", t_max=8))
        assert res.status == "solved"
        assert res.s >= 3
        assert match_roots([r.point for r in res.roots], [(-1.101, -2.878, -2.821), (0.966, -2.813, 3.072)]) < 1e-3

    def test_earlier_termination(self, solved):
        for name in ("cox98", "gauss"):
            res = solved(name, criterion="both")
            assert res.first_dims[0] <= res.first_rank[0]

    def test_kernel_polys_vanish_at_roots(self, solved):
        res = solved("cox98")
        sol = iteration(res, res.t).solution
        for g in sol.kernel_polys:
            scale = np.linalg.norm(g.coeff_array())
            for r in res.roots:
                assert abs(g(r.point)) <= 1e-5 * scale

    def test_badly_scaled_system(self):
        sys = parse_system(
            "vars x1 x2;"
            "-9*x1^2*x2 + 30*x1*x2^2 - 9*x2^3 - 18*x1^2 + 88.5*x1*x2 - 31.5*x2^2 + 57*x1 - 31.5*x2 - 9;"
            "27*x1^3 - 63*x1^2*x2 + 48*x1*x2^2 - 12*x2^3 - 139.5*x1^2 + 205.5*x1*x2 - 75*x2^2 + 192*x1 - 133.5*x2 - 49.5;"
            "12*x1^2*x2 + 14*x1*x2^2 + 4*x2^3 + 6*x1^2 + 11*x1*x2 + 4*x2^2 + 2*x1 + x2;"
        )
        res = pp.solve(sys, pp.SolveConfig(t_max=sys.D + 6))
        assert res.status == "solved"
        assert match_roots([r.point for r in res.roots], [(0, -0.5), (1, -2), (1.5, -0.5)]) < 1e-6

    @pytest.mark.parametrize(
        "kw",
        [
            {"mode": "complex", "criterion": "rank"},
            {"t_start": 1},
            {"t_start": 5, "t_max": 4},
            {"mode": "other"},
            {"basis": "other"},
        ],
    )
    def test_config_errors(self, kw):
        with pytest.raises(ValueError):
            pp.solve(corpus.load("cox98"), pp.SolveConfig(**kw))

    def test_deterministic(self):
        a = pp.solve(corpus.load("gauss"))
        b = pp.solve(corpus.load("gauss"))
        assert [r.coordinates for r in a.roots] == [r.coordinates for r in b.roots]
