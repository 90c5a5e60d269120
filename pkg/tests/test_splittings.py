import numpy as np
import pytest
import scipy.sparse as sp

from randrelax.bounds import jacobi_column_sums
from randrelax.problems import ProblemSpec, build_system
from randrelax.splittings import (
    RESYNC_SWEEPS,
    IterationVectors,
    JacobiSplitting,
    cyclic_sweep,
    energy_error_sq_drop,
    gauss_seidel_iterate,
    iteration_matrix,
    iteration_matrix_row,
    relax_component,
)

from . import oracles

A2 = sp.csr_matrix(np.array([[2.0, -1.0], [-1.0, 2.0]]))


def spd(rng, n):
    G = rng.standard_normal((n, n))
    return G @ G.T + n * np.eye(n)


class TestIterationMatrixRow:
    def test_jacobi_row(self):
        cols, vals = iteration_matrix_row(JacobiSplitting.from_matrix(A2), 0)
        row = np.zeros(2)
        row[cols] = vals
        assert np.array_equal(row, [0.0, 0.5])

    def test_omega_zero_is_identity(self):
        s = JacobiSplitting.from_matrix(A2, omega=0.0)
        cols, vals = iteration_matrix_row(s, 1)
        row = np.zeros(2)
        row[cols] = vals
        assert np.array_equal(row, [0.0, 1.0])

    def test_relaxed_row(self):
        cols, vals = iteration_matrix_row(JacobiSplitting.from_matrix(A2, 1.5), 0)
        row = np.zeros(2)
        row[cols] = vals
        assert row == pytest.approx([-0.5, 0.75], abs=1e-15)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            iteration_matrix_row(JacobiSplitting.from_matrix(A2), 2)

    @pytest.mark.parametrize("omega", [0.5, 1.0, 1.7])
    def test_full_matrix_against_oracle(self, rng, omega):
        A = rng.standard_normal((6, 6)) + 6 * np.eye(6)
        H = iteration_matrix(JacobiSplitting.from_matrix(sp.csr_matrix(A), omega)).toarray()
        assert np.allclose(H, oracles.jacobi_matrix(A, omega), atol=1e-15)


class TestSplitting:
    def test_zero_diagonal_rejected(self):
        with pytest.raises(ValueError):
            JacobiSplitting.from_matrix(sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 1.0]])))

    def test_nonfinite_omega(self):
        with pytest.raises(ValueError):
            JacobiSplitting.from_matrix(A2, omega=np.inf)


class TestRelaxComponent:
    def test_decoupled(self):
        s = JacobiSplitting.from_matrix(sp.csr_matrix(2 * np.eye(2)))
        b = np.array([2.0, 2.0])
        v = relax_component(s, IterationVectors.from_x(s, b), b, 0)
        assert np.array_equal(v.x, [1, 0]) and np.array_equal(v.r, [0, 2])

    def test_zero_residual_component(self):
        s = JacobiSplitting.from_matrix(A2)
        b = np.array([0.0, 1.0])
        v = IterationVectors.from_x(s, b)
        before = v.copy()
        relax_component(s, v, b, 0)
        assert np.array_equal(v.x, before.x) and np.array_equal(v.r, before.r)
        assert np.array_equal(v.r_hat, before.r_hat)

    def test_two_by_two(self):
        s = JacobiSplitting.from_matrix(A2)
        b = np.ones(2)
        v = relax_component(s, IterationVectors.from_x(s, b), b, 0)
        assert np.array_equal(v.x, [0.5, 0.0])
        assert np.array_equal(v.r, b - A2 @ v.x)
        assert np.array_equal(v.r, [0.0, 1.5])
        assert np.array_equal(v.r_hat, [0.0, 0.75])

    def test_out_of_range(self):
        s = JacobiSplitting.from_matrix(A2)
        with pytest.raises(IndexError):
            relax_component(s, IterationVectors.from_x(s, np.ones(2)), np.ones(2), 5)

    @pytest.mark.parametrize("omega", [0.6, 1.0, 1.4])
    def test_matches_dense_oracle(self, rng, omega):
        A = rng.standard_normal((8, 8)) + 8 * np.eye(8)
        b = rng.standard_normal(8)
        s = JacobiSplitting.from_matrix(sp.csr_matrix(A), omega)
        v = IterationVectors.from_x(s, b)
        x = np.zeros(8)
        for i in rng.integers(0, 8, 50):
            old = v.x.copy()
            relax_component(s, v, b, int(i))
            x = oracles.relax(A, b, x, int(i), omega)
            assert np.count_nonzero(v.x != old) <= 1
            assert np.allclose(v.x, x, rtol=1e-13, atol=1e-15)
            r = b - A @ v.x
            assert np.allclose(v.r, r, rtol=1e-10, atol=1e-12 * np.abs(b).max())
            assert np.allclose(v.r_hat, r / np.diag(A), atol=1e-12)

    def test_periodic_resync(self, rng):
        A = sp.csr_matrix(rng.standard_normal((5, 5)) + 5 * np.eye(5))
        b = rng.standard_normal(5)
        s = JacobiSplitting.from_matrix(A)
        v = IterationVectors.from_x(s, b)
        for k in range(RESYNC_SWEEPS * 5 - 1):
            relax_component(s, v, b, k % 5)
        assert v.since_resync == RESYNC_SWEEPS * 5 - 1
        relax_component(s, v, b, 0)
        assert v.since_resync == 0
        assert np.array_equal(v.r, b - A @ v.x)


class TestEnergyDrop:
    def test_example(self):
        s = JacobiSplitting.from_matrix(A2)
        assert energy_error_sq_drop(s, 2.0, 0) == 2.0

    def test_example_against_norms(self):
        s = JacobiSplitting.from_matrix(A2)
        xs = np.array([1.0, 1.0])
        b = A2 @ xs
        x0 = np.array([-0.5, 0.0])
        r0 = b - A2 @ x0
        x1 = oracles.relax(A2.toarray(), b, x0, 0)
        drop = oracles.energy_sq(A2.toarray(), x0 - xs) - oracles.energy_sq(A2.toarray(), x1 - xs)
        assert r0[0] == 2.0
        assert drop == pytest.approx(energy_error_sq_drop(s, r0[0], 0), rel=1e-15)

    def test_omega_two(self):
        assert energy_error_sq_drop(JacobiSplitting.from_matrix(A2, 2.0), 7.0, 1) == 0.0

    def test_zero_residual(self):
        assert energy_error_sq_drop(JacobiSplitting.from_matrix(A2), 0.0, 1) == 0.0

    def test_nonpositive_diagonal(self):
        s = JacobiSplitting.from_matrix(sp.csr_matrix(np.array([[-2.0, 1.0], [1.0, 2.0]])))
        with pytest.raises(ValueError):
            energy_error_sq_drop(s, 1.0, 0)

    @pytest.mark.parametrize("omega", [0.5, 1.0, 1.5])
    def test_identity_on_random_spd(self, rng, omega):
        for _ in range(20):
            A = spd(rng, 6)
            xs = rng.standard_normal(6)
            b = A @ xs
            s = JacobiSplitting.from_matrix(sp.csr_matrix(A), omega)
            x = rng.standard_normal(6)
            for i in rng.integers(0, 6, 4):
                r_i = b[i] - A[i] @ x
                x_new = oracles.relax(A, b, x, int(i), omega)
                drop = oracles.energy_sq(A, x - xs) - oracles.energy_sq(A, x_new - xs)
                assert drop == pytest.approx(energy_error_sq_drop(s, r_i, int(i)), rel=1e-9)
                x = x_new


class TestCyclicSweep:
    def test_diagonal_exact(self):
        A = sp.diags([2.0, 4.0, 5.0]).tocsr()
        b = np.array([1.0, 2.0, 3.0])
        s = JacobiSplitting.from_matrix(A)
        v = cyclic_sweep(s, IterationVectors.from_x(s, b), b)
        assert np.array_equal(v.x, b / A.diagonal())

    def test_two_by_two(self):
        s = JacobiSplitting.from_matrix(A2)
        b = np.ones(2)
        v = cyclic_sweep(s, IterationVectors.from_x(s, b), b)
        assert np.array_equal(v.x, [0.5, 0.75])
        assert np.array_equal(gauss_seidel_iterate(A2, b, np.zeros(2)), [0.5, 0.75])

    def test_incremental_residual(self, rng):
        A = sp.csr_matrix(rng.standard_normal((30, 30)) * (rng.random((30, 30)) < 0.2)
                          + 10 * np.eye(30))
        b = rng.standard_normal(30)
        s = JacobiSplitting.from_matrix(A)
        v = cyclic_sweep(s, IterationVectors.from_x(s, b), b)
        assert np.allclose(v.r, b - A @ v.x, rtol=0, atol=1e-12)

    def test_loop_oracle(self, rng):
        A = rng.standard_normal((9, 9)) + 9 * np.eye(9)
        b = rng.standard_normal(9)
        x0 = rng.standard_normal(9)
        s = JacobiSplitting.from_matrix(sp.csr_matrix(A))
        v = cyclic_sweep(s, IterationVectors.from_x(s, b, x0), b)
        assert np.allclose(v.x, oracles.gauss_seidel_sweep(A, b, x0), rtol=0, atol=1e-13)


class TestSingleStepInequalities:
    """r-hat in u-norm with rho of D^{-1}B, and r in u-norm with rho of B D^{-1}."""

    def _system(self, rng, n=12):
        A = -np.abs(rng.standard_normal((n, n))) * (rng.random((n, n)) < 0.4)
        np.fill_diagonal(A, 0)
        d = np.abs(A).sum(axis=0) * (1.2 + rng.random(n)) + 0.1
        A = A * np.sign(rng.standard_normal((n, n)))
        np.fill_diagonal(A, d)
        return A

    def test_preconditioned(self, rng):
        for _ in range(10):
            A = self._system(rng)
            n = A.shape[0]
            u = rng.random(n) + 0.5
            d = np.diag(A)
            rho = oracles.column_sums(oracles.jacobi_matrix(A), u)
            if rho.max() >= 1:
                continue
            assert np.allclose(jacobi_column_sums(sp.csr_matrix(A), u), rho, rtol=1e-13)
            b = rng.standard_normal(n)
            x = np.zeros(n)
            for i in rng.integers(0, n, 100):
                rh = (b - A @ x) / d
                x = oracles.relax(A, b, x, int(i))
                new = (b - A @ x) / d
                assert u @ np.abs(new) <= u @ np.abs(rh) - (1 - rho[i]) * u[i] * abs(rh[i]) + 1e-12

    def test_original(self, rng):
        for _ in range(10):
            A = self._system(rng)
            n = A.shape[0]
            u = rng.random(n) + 0.5
            d = np.diag(A)
            BD = oracles.jacobi_matrix(A.T).T         # D^{-1} acting on columns
            rho = oracles.column_sums(BD, u)
            if rho.max() >= 1:
                continue
            b = rng.standard_normal(n)
            x = np.zeros(n)
            for i in rng.integers(0, n, 100):
                r = b - A @ x
                x = oracles.relax(A, b, x, int(i))
                new = b - A @ x
                assert u @ np.abs(new) <= u @ np.abs(r) - (1 - rho[i]) * u[i] * abs(r[i]) + 1e-12
            assert np.all(d > 0)

    def test_convection_system(self):
        A, z, b = build_system(ProblemSpec(8, sigma=1.0))
        s = JacobiSplitting.from_matrix(A)
        rho = jacobi_column_sums(A, np.ones(A.shape[0]))
        v = IterationVectors.from_x(s, b)
        for k in range(5 * s.n):
            i = k % s.n
            old = np.abs(v.r_hat).sum()
            ri = v.r_hat[i]
            relax_component(s, v, b, i)
            assert np.abs(v.r_hat).sum() <= old - (1 - rho[i]) * abs(ri) + 1e-12
