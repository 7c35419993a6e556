import numpy as np
import pytest
import scipy.linalg as sla

from realvar import numla
from realvar.numla import RankTolerance


class TestRank:
    def test_identity(self):
        assert numla.numeric_rank(np.eye(3)).rank == 3

    def test_ones(self):
        assert numla.numeric_rank(np.ones((2, 2))).rank == 1

    def test_psd_moment_example(self):
        # M_1(L) of the ideal (x1^2, x2^2, x1*x2) after psd forces b = c = 0
        assert numla.numeric_rank(np.diag([0.7, 0.0, 0.0])).rank == 1

    def test_threshold_formula(self):
        tol = RankTolerance(relative=1e-3)
        assert tol.threshold(2.0, (3, 5)) == pytest.approx(1e-2)
        assert RankTolerance(relative=1e-3, size_scaled=False).threshold(2.0, (3, 5)) == pytest.approx(2e-3)
        assert RankTolerance(absolute=0.5).threshold(100.0, (3, 5)) == 0.5

    def test_tolerance_decides(self):
        A = np.diag([1.0, 1e-6])
        assert numla.numeric_rank(A).rank == 2
        assert numla.numeric_rank(A, 1e-4).rank == 1

    def test_nonfinite_reports_shape(self):
        with pytest.raises(numla.LinAlgFailure, match="2x2"):
            numla.numeric_rank(np.array([[np.nan, 0], [0, 1]]))

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("REALVAR_RANK_TOL", "1e-3")
        assert RankTolerance.from_env().relative == 1e-3


class TestNullspace:
    def test_zero_matrix(self):
        assert numla.nullspace_basis(np.zeros((2, 3))).shape == (3, 3)

    def test_one_row(self):
        N = numla.nullspace_basis(np.array([[1.0, 0.0, -1.0]]))
        assert N.shape == (2, 3)
        assert np.allclose(N @ [1, 0, -1], 0)
        assert np.allclose(N @ N.T, np.eye(2))

    def test_example_45_G2(self):
        # rows x1^2, x2^2, x1*x2, x1, x2 over 1, x1, x2, x1^2, x1*x2, x2^2
        G = np.zeros((5, 6))
        for r, c in enumerate([3, 5, 4, 1, 2]):
            G[r, c] = 1.0
        N = numla.nullspace_basis(G)
        assert N.shape == (1, 6)
        assert np.allclose(np.abs(N[0]), [1, 0, 0, 0, 0, 0])

    def test_row_space_complements(self):
        A = np.random.default_rng(0).standard_normal((3, 7))
        R, N = numla.row_space_basis(A), numla.nullspace_basis(A)
        assert R.shape[0] + N.shape[0] == 7
        assert np.allclose(R @ N.T, 0)


class TestRref:
    def test_identity(self):
        R, piv = numla.rref_partial_pivot(np.eye(3))
        assert np.allclose(R, np.eye(3)) and piv == [0, 1, 2]

    def test_zero_first_column(self):
        R, piv = numla.rref_partial_pivot(np.array([[0.0, 1.0], [0.0, 2.0]]))
        assert np.allclose(R, [[0, 1], [0, 0]]) and piv == [1]

    def test_rank_two(self):
        R, piv = numla.rref_partial_pivot(np.array([[1.0, 2, 3], [2, 4, 6], [1, 0, 1]]))
        assert piv == [0, 1]
        # hand elimination: x = 1 - z... rows (1, 0, 1) and (0, 1, 1)
        assert np.allclose(R, [[1, 0, 1], [0, 1, 1], [0, 0, 0]])

    def test_pivot_count_is_svd_rank(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            A = rng.standard_normal((5, 3)) @ rng.standard_normal((3, 6))
            _, piv = numla.rref_partial_pivot(A)
            assert len(piv) == numla.numeric_rank(A).rank == 3


class TestEig:
    def test_diag(self):
        w, _ = numla.symmetric_eig(np.diag([2.0, 1.0]))
        assert np.allclose(w, [1, 2])

    def test_swap(self):
        w, V = numla.symmetric_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(w, [-1, 1])
        assert np.allclose(V.T @ V, np.eye(2))

    def test_char_poly(self):
        w, _ = numla.symmetric_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert np.allclose(w, [1, 3])

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            numla.symmetric_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestClusteredSchur:
    def test_double_eigenvalue(self):
        cl = numla.clustered_schur(np.diag([1.0, 1.0, 2.0]))
        assert [(round(c.value.real, 12), c.size) for c in cl] == [(1.0, 2), (2.0, 1)]

    def test_rotation_is_one_pair(self):
        cl = numla.clustered_schur(np.array([[0.0, -1.0], [1.0, 0.0]]))
        assert len(cl) == 1 and cl[0].size == 2
        assert cl[0].value == pytest.approx(1j)

    def test_companion(self):
        # (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
        C = np.array([[0.0, 0, 6], [1, 0, -11], [0, 1, 6]])
        cl = numla.clustered_schur(C)
        assert [c.size for c in cl] == [1, 1, 1]
        assert np.allclose([c.value for c in cl], [1, 2, 3])

    def test_invariant_subspaces(self):
        rng = np.random.default_rng(5)
        S = rng.standard_normal((4, 4))
        A = S @ np.diag([1.0, 1.0, -2.0, 3.0]) @ np.linalg.inv(S)
        for c in numla.clustered_schur(A):
            Q = c.basis
            assert Q.shape[1] == c.size
            # A Q stays in span Q
            resid = A @ Q - Q @ (Q.T @ A @ Q)
            assert np.abs(resid).max() < 1e-8 * np.linalg.norm(A)

    def test_principal_angles(self):
        A = np.array([[1.0, 0, 0], [0, 1, 0]])
        assert np.allclose(numla.principal_angles(A, A[::-1]), 0)
        assert np.allclose(numla.principal_angles(A[:1], np.array([[0.0, 0, 1]])), np.pi / 2)
