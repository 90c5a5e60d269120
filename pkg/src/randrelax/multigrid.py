"""Geometric V-cycle for the 2-D Dirichlet Laplacian with relaxation smoothers.

Grids have N + 1 a power of two; each coarser level has N_c = (N - 1) / 2
and the coarsest grid is 7 x 7, solved by a dense LU factorization.
Every level uses the rediscretized five-point Laplacian.
"""

import csv
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import _kernels
from .problems import build_laplacian
from .spectral import ConvergenceError
from .splittings import JacobiSplitting

__all__ = [
    "COARSEST_N",
    "GridHierarchy",
    "SmootherConfig",
    "MultigridResult",
    "build_hierarchy",
    "prolongation_matrix",
    "restrict",
    "prolong",
    "smooth",
    "v_cycle",
    "solve",
    "cycles_to_tolerance",
    "multigrid_study",
    "write_study_csv",
]

COARSEST_N = 7
MAX_CYCLES = 100
STUDY_COLUMNS = ("N", "scheme", "s", "cycles", "final_relative_residual")


def _check_grid(N):
    if N < COARSEST_N or (N + 1) & N != 0:
        raise ValueError(f"N = {N}: need N >= {COARSEST_N} with N + 1 a power of two")


@lru_cache(maxsize=None)
def _prolongation_1d(Nc):
    Nf = 2 * Nc + 1
    rows, cols, vals = [], [], []
    for i in range(Nc):
        f = 2 * i + 1
        rows += [f - 1, f, f + 1]
        cols += [i, i, i]
        vals += [0.5, 1.0, 0.5]
    return sp.csr_matrix((vals, (rows, cols)), shape=(Nf, Nc))


@lru_cache(maxsize=None)
def prolongation_matrix(Nc):
    """Bilinear interpolation from the Nc x Nc grid to the (2Nc+1) x (2Nc+1) grid."""
    P1 = _prolongation_1d(Nc)
    return sp.kron(P1, P1, format="csr")


def prolong(coarse, N_coarse):
    """Bilinear interpolation of a coarse grid vector (lexicographic ordering)."""
    coarse = np.asarray(coarse, dtype=np.float64)
    if coarse.shape != (N_coarse * N_coarse,):
        raise ValueError(f"coarse vector has shape {coarse.shape}, expected ({N_coarse**2},)")
    return prolongation_matrix(N_coarse) @ coarse


def restrict(fine, N_fine):
    """Full-weighting restriction, i.e. P^T / 4 for bilinear P."""
    fine = np.asarray(fine, dtype=np.float64)
    if N_fine % 2 == 0 or N_fine < 3:
        raise ValueError(f"fine grid size {N_fine} has no coarse partner")
    if fine.shape != (N_fine * N_fine,):
        raise ValueError(f"fine vector has shape {fine.shape}, expected ({N_fine**2},)")
    Nc = (N_fine - 1) // 2
    return 0.25 * (prolongation_matrix(Nc).T @ fine)


@dataclass(frozen=True, eq=False)
class GridHierarchy:
    """Levels finest first: sizes N_l, matrices A_l and their splittings."""

    sizes: tuple
    matrices: tuple
    splittings: tuple = field(repr=False)
    coarse_lu: tuple = field(repr=False)

    @property
    def levels(self):
        return list(zip(self.sizes, self.matrices))

    @property
    def N(self):
        return self.sizes[0]

    @property
    def n(self):
        return self.sizes[0] ** 2


def build_hierarchy(N):
    _check_grid(N)
    sizes = [N]
    while sizes[-1] > COARSEST_N:
        sizes.append((sizes[-1] - 1) // 2)
    mats = tuple(build_laplacian(m) for m in sizes)
    splits = tuple(JacobiSplitting.from_matrix(A) for A in mats)
    lu = sla.lu_factor(mats[-1].toarray())
    return GridHierarchy(tuple(sizes), mats, splits, lu)


@dataclass(frozen=True)
class SmootherConfig:
    """scheme: "cyclic", "greedy" (Gauss-Southwell on D^{-1} r) or "randomized"
    (uniform probabilities).  Each smoothing phase performs round(s N_l^2)
    relaxations."""

    scheme: str = "cyclic"
    s: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in ("cyclic", "greedy", "randomized"):
            raise ValueError(f"unknown smoother {self.scheme!r}")
        if not self.s > 0:
            raise ValueError("s must be positive")
        if self.scheme == "cyclic" and float(self.s) != int(self.s):
            raise ValueError("fractional s needs a randomized or greedy smoother")

    def relaxations(self, N):
        return max(1, int(round(self.s * N * N)))


def smooth(split, b, x, sm, rng):
    """One smoothing phase in place on x; returns x."""
    n = split.n
    m = sm.relaxations(int(round(np.sqrt(n))))
    r = b - split.A @ x
    r_hat = r / split.diag
    cptr, crow, cval = split.column_arrays()
    if sm.scheme == "cyclic":
        order = np.arange(m, dtype=np.int64) % n
        _kernels.relax_sequence(order, cptr, crow, cval, split.diag, 1.0, x, r, r_hat)
    elif sm.scheme == "randomized":
        order = rng.integers(0, n, size=m, dtype=np.int64)
        _kernels.relax_sequence(order, cptr, crow, cval, split.diag, 1.0, x, r, r_hat)
    else:
        picked = np.empty(m, dtype=np.int64)
        _kernels.relax_greedy(m, np.ones(n), True, cptr, crow, cval, split.diag, 1.0,
                              x, r, r_hat, picked)
    return x


def v_cycle(h, b, x0, sm, rng=None, level=0):
    """One V-cycle; returns the new iterate (x0 is not modified)."""
    if rng is None:
        rng = np.random.default_rng(sm.seed)
    n = h.sizes[level] ** 2
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (n,):
        raise ValueError(f"right-hand side has shape {b.shape}, expected ({n},)")
    if level == len(h.sizes) - 1:
        return sla.lu_solve(h.coarse_lu, b)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    split = h.splittings[level]
    smooth(split, b, x, sm, rng)
    Nf = h.sizes[level]
    rc = restrict(b - split.A @ x, Nf)
    ec = v_cycle(h, rc, None, sm, rng, level + 1)
    x += prolong(ec, h.sizes[level + 1])
    smooth(split, b, x, sm, rng)
    return x


@dataclass(frozen=True)
class MultigridResult:
    cycles: int
    final_relative_residual: float
    history: np.ndarray
    x: np.ndarray


def solve(h, b, sm, tol=1e-6, x0=None, max_cycles=MAX_CYCLES):
    """V-cycles until ||b - Ax||_2 <= tol ||b - A x0||_2.

    Raises ConvergenceError (carrying the MultigridResult) after
    `max_cycles` cycles.
    """
    A = h.matrices[0]
    b = np.asarray(b, dtype=np.float64)
    x = np.zeros(h.n) if x0 is None else np.array(x0, dtype=np.float64)
    rng = np.random.default_rng(sm.seed)
    r0 = float(np.linalg.norm(b - A @ x))
    hist = [1.0]
    if r0 == 0.0:
        return MultigridResult(0, 0.0, np.array(hist), x)
    cycles = 0
    while hist[-1] > tol:
        if cycles == max_cycles:
            res = MultigridResult(cycles, hist[-1], np.array(hist), x)
            raise ConvergenceError(f"no reduction to {tol:g} within {max_cycles} V-cycles",
                                   result=res)
        x = v_cycle(h, b, x, sm, rng)
        cycles += 1
        hist.append(float(np.linalg.norm(b - A @ x)) / r0)
    return MultigridResult(cycles, hist[-1], np.array(hist), x)


def cycles_to_tolerance(h, b, sm, tol=1e-6):
    return solve(h, b, sm, tol).cycles


def _study_rhs(N, seed):
    return np.random.default_rng(seed).random(N * N)


def multigrid_study(sizes=(31, 63, 127), smoothers=None, tol=1e-6, seed=0, rhs=None):
    """Rows (N, scheme, s, cycles, final_relative_residual) for each grid and smoother.

    The default right-hand side is uniform random on [0, 1) from `seed`;
    `rhs(N)` overrides it.
    """
    if smoothers is None:
        smoothers = [SmootherConfig("cyclic", 1, seed), SmootherConfig("greedy", 1, seed),
                     SmootherConfig("randomized", 1, seed),
                     SmootherConfig("randomized", 1.5, seed),
                     SmootherConfig("randomized", 2, seed)]
    rows = []
    for N in sizes:
        h = build_hierarchy(N)
        b = _study_rhs(N, seed) if rhs is None else rhs(N)
        for sm in smoothers:
            res = solve(h, b, sm, tol)
            rows.append((N, sm.scheme, float(sm.s), res.cycles, res.final_relative_residual))
    return rows


def write_study_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STUDY_COLUMNS)
        for N, scheme, s, cycles, res in rows:
            w.writerow([N, scheme, f"{s:g}", cycles, f"{res:.17g}"])
