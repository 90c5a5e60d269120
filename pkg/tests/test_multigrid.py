import csv

import numpy as np
import pytest

from randrelax.multigrid import (
    COARSEST_N,
    SmootherConfig,
    build_hierarchy,
    cycles_to_tolerance,
    multigrid_study,
    prolong,
    restrict,
    solve,
    v_cycle,
    write_study_csv,
)
from randrelax.problems import build_laplacian
from randrelax.spectral import ConvergenceError

from . import oracles


class TestTransfer:
    def test_restrict_constant(self):
        # full weighting keeps constants away from the boundary ring
        c = restrict(np.full(15 * 15, 3.0), 15).reshape(7, 7)
        assert np.allclose(c[1:-1, 1:-1], 3.0, rtol=0, atol=1e-15)

    def test_restrict_delta(self):
        Nf = 7
        f = np.zeros(Nf * Nf)
        f[3 * Nf + 3] = 1.0                   # fine (3, 3) coincides with coarse (1, 1)
        c = restrict(f, Nf).reshape(3, 3)
        expected = np.zeros((3, 3))
        expected[1, 1] = 0.25
        assert np.array_equal(c, expected)

    def test_restrict_zero(self):
        assert np.array_equal(restrict(np.zeros(49), 7), np.zeros(9))

    def test_prolong_constant(self):
        f = prolong(np.full(9, 2.0), 3).reshape(7, 7)
        assert np.all(f[1:-1, 1:-1] == 2.0)
        assert np.array_equal(f, oracles.bilinear_prolong(np.full(9, 2.0), 3).reshape(7, 7))

    def test_prolong_zero(self):
        assert np.array_equal(prolong(np.zeros(49), 7), np.zeros(225))

    @pytest.mark.parametrize("Nc", [3, 7, 15])
    def test_prolong_oracle(self, rng, Nc):
        c = rng.standard_normal(Nc * Nc)
        assert np.allclose(prolong(c, Nc), oracles.bilinear_prolong(c, Nc), rtol=0, atol=1e-15)

    @pytest.mark.parametrize("Nc", [3, 7, 31])
    def test_adjoint(self, rng, Nc):
        Nf = 2 * Nc + 1
        c = rng.standard_normal(Nc * Nc)
        f = rng.standard_normal(Nf * Nf)
        lhs = prolong(c, Nc) @ f
        rhs = 4 * (c @ restrict(f, Nf))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            restrict(np.zeros(50), 7)
        with pytest.raises(ValueError):
            restrict(np.zeros(64), 8)
        with pytest.raises(ValueError):
            prolong(np.zeros(10), 3)


class TestHierarchy:
    def test_levels(self):
        h = build_hierarchy(63)
        assert h.sizes == (63, 31, 15, 7)
        assert h.sizes[-1] == COARSEST_N
        for N, A in h.levels:
            assert A.shape == (N * N, N * N)
            assert abs(A - build_laplacian(N)).max() == 0

    @pytest.mark.parametrize("N", [3, 8, 30, 62])
    def test_invalid(self, N):
        with pytest.raises(ValueError):
            build_hierarchy(N)


class TestSmootherConfig:
    def test_relaxations(self):
        assert SmootherConfig("randomized", 1.5).relaxations(15) == round(1.5 * 225)
        assert SmootherConfig("cyclic", 2).relaxations(7) == 98

    def test_validation(self):
        with pytest.raises(ValueError):
            SmootherConfig("cyclic", 1.5)
        with pytest.raises(ValueError):
            SmootherConfig("randomized", 0)
        with pytest.raises(ValueError):
            SmootherConfig("jacobi")
        SmootherConfig("greedy", 0.5)


class TestVCycle:
    def test_zero(self):
        h = build_hierarchy(15)
        assert np.array_equal(v_cycle(h, np.zeros(225), np.zeros(225), SmootherConfig()),
                              np.zeros(225))

    @pytest.mark.parametrize("scheme", ["cyclic", "greedy", "randomized"])
    def test_two_level_reduces_residual(self, rng, scheme):
        h = build_hierarchy(15)
        assert len(h.sizes) == 2
        A = h.matrices[0]
        b = rng.standard_normal(225)
        x0 = np.zeros(225)
        x = v_cycle(h, b, x0, SmootherConfig(scheme))
        assert np.linalg.norm(b - A @ x) < np.linalg.norm(b)
        assert np.array_equal(x0, np.zeros(225))

    def test_coarsest_is_exact(self, rng):
        h = build_hierarchy(7)
        b = rng.standard_normal(49)
        x = v_cycle(h, b, None, SmootherConfig())
        assert np.allclose(h.matrices[0] @ x, b, atol=1e-10)

    def test_reproducible(self, rng):
        h = build_hierarchy(31)
        b = rng.standard_normal(31 * 31)
        sm = SmootherConfig("randomized", 1, seed=4)
        assert np.array_equal(v_cycle(h, b, None, sm), v_cycle(h, b, None, sm))


class TestCycles:
    def test_tol_one(self, rng):
        h = build_hierarchy(15)
        assert cycles_to_tolerance(h, rng.random(225), SmootherConfig(), tol=1.0) == 0

    def test_more_smoothing_helps(self):
        h = build_hierarchy(31)
        b = np.random.default_rng(0).random(31 * 31)
        c1 = cycles_to_tolerance(h, b, SmootherConfig("randomized", 1))
        c2 = cycles_to_tolerance(h, b, SmootherConfig("randomized", 2))
        assert c2 <= c1

    def test_cyclic_63_vs_127(self):
        counts = []
        for N in (63, 127):
            b = np.random.default_rng(0).random(N * N)
            counts.append(cycles_to_tolerance(build_hierarchy(N), b, SmootherConfig()))
        assert abs(counts[0] - counts[1]) <= 1

    def test_history_and_solution(self, rng):
        h = build_hierarchy(31)
        b = rng.random(31 * 31)
        res = solve(h, b, SmootherConfig("greedy"), tol=1e-8)
        assert res.history[0] == 1.0 and res.history[-1] <= 1e-8
        assert np.all(np.diff(res.history) < 0)
        assert len(res.history) == res.cycles + 1

    def test_cap(self, rng):
        h = build_hierarchy(31)
        with pytest.raises(ConvergenceError) as info:
            solve(h, rng.random(31 * 31), SmootherConfig("randomized", 0.01), max_cycles=3)
        assert info.value.result.cycles == 3

    def test_zero_rhs(self):
        assert cycles_to_tolerance(build_hierarchy(15), np.zeros(225), SmootherConfig()) == 0


class TestStudy:
    def test_csv(self, tmp_path):
        rows = multigrid_study(sizes=(15, 31), smoothers=[SmootherConfig("cyclic"),
                                                          SmootherConfig("randomized", 1.5)])
        assert len(rows) == 4
        path = tmp_path / "mg.csv"
        write_study_csv(rows, path)
        with open(path, newline="", encoding="utf-8") as fh:
            data = list(csv.reader(fh))
        assert data[0] == ["N", "scheme", "s", "cycles", "final_relative_residual"]
        assert data[1][:3] == ["15", "cyclic", "1"] and data[2][2] == "1.5"
        for row in data[1:]:
            assert float(row[4]) <= 1e-6 and int(row[3]) > 0
