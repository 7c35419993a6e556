import numpy as np
import pytest

from realvar import corpus, sdp
from realvar.moment import moment_matrices
from realvar.parse import parse_polynomial, parse_system
from realvar.polycore import coefficient_matrix, n_monomials

EX45 = "vars x1 x2; x1^2; x2^2; x1*x2;"
EX46 = "vars x1 x2; x1^2 + x2^2;"


def generic(text_or_sys, t):
    sys = parse_system(text_or_sys) if isinstance(text_or_sys, str) else text_or_sys
    return sdp.generic_element(sdp.build_cone_problem(sys, t))


def kernel_span_equals(sol, polys, n):
    """Span of the kernel polynomials equals the span of ``polys``."""
    s0 = sol.moment_order
    K = np.atleast_2d(sol.kernel_basis)
    W = coefficient_matrix(polys, n, s0)
    both = np.vstack([K, W])
    r = np.linalg.matrix_rank
    return r(K, 1e-6) == r(W, 1e-6) == r(both, 1e-6)


class TestConeProblem:
    def test_example_45(self):
        prob = sdp.build_cone_problem(parse_system(EX45), 2)
        assert prob.kernel_basis.shape == (3, 6)
        # quadratic moments forced to zero
        assert np.allclose(prob.kernel_basis[:, 3:], 0)

    def test_linear(self):
        prob = sdp.build_cone_problem(parse_system("vars x1; x1 - 1;"), 2)
        assert prob.kernel_basis.shape == (1, 3)
        y = prob.kernel_basis[0]
        assert np.allclose(y, y[0])

    def test_cox98_t3(self):
        assert sdp.build_cone_problem(corpus.load("cox98"), 3).kernel_basis.shape[0] == 11

    def test_below_degree(self):
        with pytest.raises(ValueError):
            sdp.build_cone_problem(parse_system(EX45), 1)


class TestGenericElement:
    def test_example_45(self):
        sol = generic(EX45, 2)
        assert sol.rank_profile == [1, 1]
        names = ("x1", "x2")
        assert kernel_span_equals(sol, [parse_polynomial(v, names) for v in names], 2)

    def test_example_46(self):
        sol = generic(EX46, 2)
        assert sol.rank_profile == [1, 1]
        names = ("x1", "x2")
        assert kernel_span_equals(sol, [parse_polynomial(v, names) for v in names], 2)

    def test_two_points_against_grid(self):
        # moments of x^2 = 1: y2 = y0, y3 = y1, y4 = y0; normalise y0 = 1 and scan y1
        best = 0
        for y1 in np.linspace(-1.5, 1.5, 301):
            M = np.array([[1, y1, 1], [y1, 1, y1], [1, y1, 1]])
            if np.linalg.eigvalsh(M)[0] >= -1e-12:
                best = max(best, np.linalg.matrix_rank(M, 1e-9))
        sol = generic("vars x1; x1^2 - 1;", 4)
        assert sol.rank_profile[2] == best == 2
        assert kernel_span_equals(sol, [parse_polynomial("x1^2 - 1", ("x1",))], 1)

    def test_empty_cone(self):
        sol = generic("vars x; x^2 + 1;", 2)
        assert sol.rank_profile == [0, 0]
        assert not np.any(sol.moment_matrix)

    def test_moment_matrix_psd_trace_one(self):
        sol = generic(corpus.load("cox98"), 4)
        M = sol.moment_matrix
        assert np.trace(M) == pytest.approx(1.0)
        assert np.linalg.eigvalsh(M)[0] >= -1e-10 * M.shape[0]

    def test_functional_in_cone_problem_kernel(self):
        sys = corpus.load("cox98")
        prob = sdp.build_cone_problem(sys, 4)
        sol = sdp.generic_element(prob)
        # L* vanishes on H_t
        assert np.abs(prob.h_rows @ sol.functional.values).max() < 1e-10

    def test_badly_scaled_definite_face(self):
        # formerly reported an empty real variety; roots (0,-1/2), (1,-2), (3/2,-1/2)
        sys = parse_system(
            "vars x1 x2;"
            "-9*x1^2*x2 + 30*x1*x2^2 - 9*x2^3 - 18*x1^2 + 88.5*x1*x2 - 31.5*x2^2 + 57*x1 - 31.5*x2 - 9;"
            "27*x1^3 - 63*x1^2*x2 + 48*x1*x2^2 - 12*x2^3 - 139.5*x1^2 + 205.5*x1*x2 - 75*x2^2 + 192*x1 - 133.5*x2 - 49.5;"
            "12*x1^2*x2 + 14*x1*x2^2 + 4*x2^3 + 6*x1^2 + 11*x1*x2 + 4*x2^2 + 2*x1 + x2;"
        )
        for t in (3, 4, 5):
            sol = generic(sys, t)
            assert sol.rank_profile[0] == 1, t


class TestRankProfile:
    def test_cox98_t6(self):
        # entries past s = 2 depend on the solver accuracy and are not compared
        assert generic(corpus.load("cox98"), 6).rank_profile[:3] == [1, 2, 2]

    def test_gauss_t5(self):
        assert generic(corpus.load("gauss"), 5).rank_profile == [1, 2, 5]

    def test_zero_functional(self):
        sol = generic("vars x1 x2; x1^2 + x2^2 + 1;", 4)
        assert sol.rank_profile == [0, 0, 0]

    def test_kernel_method_agrees_on_simple_faces(self):
        for text, t in ((EX45, 4), (EX46, 4), ("vars x1; x1^2 - 1;", 6)):
            sol = generic(text, t)
            assert sdp.rank_profile(sol, method="kernel") == sol.rank_profile

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            sdp.rank_profile(generic(EX45, 2), method="other")


cp = pytest.importorskip("cvxpy")


def _max_on_kernel(A, u):
    """max u'Mu over trace-one psd M in span(A), solved by cvxpy."""
    c = cp.Variable(len(A))
    M = sum(c[k] * A[k] for k in range(len(A)))
    prob = cp.Problem(cp.Maximize(u @ M @ u), [(M + M.T) / 2 >> 0, cp.trace(M) == 1])
    prob.solve(solver=cp.CLARABEL)
    return prob.value


@pytest.mark.parametrize("name,t", [("nongorenstein", 4), ("twopoints", 4), ("cox98", 4), ("gauss", 4)])
def test_kernel_against_cvxpy(name, t):
    """Every psd element of the cone annihilates the computed kernel (so it is not too big);
    the generic element has the computed rank (so it is not too small)."""
    sys = corpus.load(name)
    prob = sdp.build_cone_problem(sys, t)
    sol = sdp.generic_element(prob)
    A = moment_matrices(prob.kernel_basis, sys.n, t // 2)
    for u in np.atleast_2d(sol.kernel_basis):
        assert _max_on_kernel(A, u) < 1e-6
    d = n_monomials(sys.n, t // 2)
    assert sol.rank_profile[-1] == d - np.atleast_2d(sol.kernel_basis).shape[0]


def test_solve_sdp_against_cvxpy():
    rng = np.random.default_rng(7)
    d, m = 5, 4
    F = rng.standard_normal((m, d, d))
    F = F + F.transpose(0, 2, 1)
    X0 = np.eye(d) + 0.1 * np.ones((d, d))
    b = np.einsum("kij,ij->k", F, X0)
    R = rng.standard_normal((d, d))
    C = R @ R.T + np.eye(d)
    ours = sdp.solve_sdp(C, F, b)
    assert ours.status == "optimal"
    X = cp.Variable((d, d), symmetric=True)
    ref = cp.Problem(cp.Minimize(cp.trace(C @ X)), [X >> 0] + [cp.trace(F[k] @ X) == b[k] for k in range(m)])
    ref.solve(solver=cp.CLARABEL)
    assert ours.primal == pytest.approx(ref.value, rel=1e-6)
    assert ours.dual == pytest.approx(ref.value, rel=1e-6)
