import numpy as np
import pytest

from schemas.smoothing import SmootherConfig, SmootherKind
from services.smoothing import smooth, split_dlu
from services.sparse import canonical
from utils.exceptions.numerics import SmootherException


def _mode(n: int, k: int) -> np.ndarray:
    j = np.arange(1, n + 1)
    return np.sin(k * np.pi * j / (n + 1))


class TestSplit:

    def test_parts_sum_to_matrix(self, lap1d):
        A = lap1d(5)
        D, L, U = split_dlu(A)
        np.testing.assert_array_equal((D + L + U).toarray(), A.toarray())
        assert np.all(np.triu(L.toarray()) == 0)
        assert np.all(np.tril(U.toarray()) == 0)

    def test_zero_diagonal_reported(self):
        split = split_dlu(canonical(np.array([[0.0, 1.0], [1.0, 2.0]])))
        assert split.has_zero_diagonal
        np.testing.assert_array_equal(split.zero_diagonal_rows, [0])


class TestSmooth:

    def test_jacobi_solves_diagonal_system(self):
        A = canonical(np.diag([2.0, 4.0, 5.0]))
        f = np.array([2.0, 8.0, 5.0])
        v = smooth(A, f, np.zeros(3), SmootherConfig(kind=SmootherKind.JACOBI, sweeps=1))
        np.testing.assert_allclose(v, [1.0, 2.0, 1.0])

    def test_zero_sweeps_returns_copy(self, lap1d):
        v0 = np.arange(4.0)
        v = smooth(lap1d(4), np.ones(4), v0, SmootherConfig(sweeps=0))
        np.testing.assert_array_equal(v, v0)
        assert v is not v0

    def test_input_not_modified(self, lap1d):
        v0 = np.ones(6)
        smooth(lap1d(6), np.zeros(6), v0, SmootherConfig(kind=SmootherKind.GAUSS_SEIDEL, sweeps=3))
        np.testing.assert_array_equal(v0, np.ones(6))

    def test_zero_diagonal_raises(self):
        A = canonical(np.array([[0.0, 1.0], [1.0, 2.0]]))
        with pytest.raises(SmootherException):
            smooth(A, np.ones(2), np.zeros(2), SmootherConfig())

    def test_damped_jacobi_matches_dense(self, lap1d, rng):
        A = lap1d(7)
        dense = A.toarray()
        f, v0 = rng.standard_normal(7), rng.standard_normal(7)
        omega = 0.6
        expected = v0 + omega * (f - dense @ v0) / np.diag(dense)
        v = smooth(A, f, v0, SmootherConfig(kind=SmootherKind.DAMPED_JACOBI, omega=omega))
        np.testing.assert_allclose(v, expected, rtol=1e-12)

    def test_gauss_seidel_matches_dense(self, lap1d, rng):
        A = lap1d(7)
        dense = A.toarray()
        f, v0 = rng.standard_normal(7), rng.standard_normal(7)
        expected = np.linalg.solve(np.tril(dense), f - np.triu(dense, 1) @ v0)
        v = smooth(A, f, v0, SmootherConfig(kind=SmootherKind.GAUSS_SEIDEL))
        np.testing.assert_allclose(v, expected, rtol=1e-12)

    def test_sor_matches_dense(self, lap1d, rng):
        A = lap1d(6)
        dense = A.toarray()
        D = np.diag(np.diag(dense))
        L, U = np.tril(dense, -1), np.triu(dense, 1)
        f, v0 = rng.standard_normal(6), rng.standard_normal(6)
        omega = 1.4
        expected = np.linalg.solve(D + omega * L, omega * f - (omega * U + (omega - 1) * D) @ v0)
        v = smooth(A, f, v0, SmootherConfig(kind=SmootherKind.SOR, omega=omega))
        np.testing.assert_allclose(v, expected, rtol=1e-12)

    def test_sor_with_unit_omega_is_gauss_seidel(self, lap1d, rng):
        A = lap1d(8)
        f, v0 = rng.standard_normal(8), rng.standard_normal(8)
        gs = smooth(A, f, v0, SmootherConfig(kind=SmootherKind.GAUSS_SEIDEL, sweeps=2))
        sor = smooth(A, f, v0, SmootherConfig(kind=SmootherKind.SOR, omega=1.0, sweeps=2))
        np.testing.assert_allclose(sor, gs, rtol=1e-12)


class TestFrequencySelectivity:
    """Damped Jacobi removes oscillatory error and barely touches smooth error"""

    def test_high_mode_damped_low_mode_kept(self, lap1d):
        n = 64
        A = lap1d(n)
        cfg = SmootherConfig(kind=SmootherKind.DAMPED_JACOBI, omega=2.0 / 3.0, sweeps=5)
        high, low = _mode(n, n), _mode(n, 1)
        high_after = smooth(A, np.zeros(n), high, cfg)
        low_after = smooth(A, np.zeros(n), low, cfg)
        assert np.linalg.norm(high) / np.linalg.norm(high_after) >= 10.0
        assert np.linalg.norm(low) / np.linalg.norm(low_after) < 2.0


class TestSmootherInvariants:

    def test_one_jacobi_sweep_on_three_points(self, lap1d):
        v = smooth(lap1d(3), np.zeros(3), np.ones(3), SmootherConfig(kind=SmootherKind.JACOBI))
        np.testing.assert_allclose(v, [0.5, 1.0, 0.5])

    @pytest.mark.parametrize("kind", list(SmootherKind))
    def test_exact_solution_is_fixed_point(self, poisson, rng, kind):
        A, _ = poisson(6)
        v_exact = rng.standard_normal(36)
        f = A @ v_exact
        v = smooth(A, f, v_exact, SmootherConfig(kind=kind, omega=1.2, sweeps=3))
        np.testing.assert_allclose(v, v_exact, rtol=0, atol=1e-10 * np.abs(v_exact).max())

    @pytest.mark.parametrize("kind", [SmootherKind.JACOBI, SmootherKind.DAMPED_JACOBI])
    def test_error_propagation_is_linear(self, lap1d, rng, kind):
        A = lap1d(9)
        cfg = SmootherConfig(kind=kind, sweeps=2)
        v1, v2 = rng.standard_normal(9), rng.standard_normal(9)
        zero = np.zeros(9)
        combined = smooth(A, zero, v1 + v2, cfg)
        np.testing.assert_allclose(combined, smooth(A, zero, v1, cfg) + smooth(A, zero, v2, cfg), atol=1e-12)
